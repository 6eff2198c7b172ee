#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "haptix/nn.hpp"

namespace haptix::nn {

namespace {

// Z[t][o] = b[o] + sum_k sum_c W[o][k][c] * X[t + k - pad][c], zero padded.
void conv_forward(const double* x, std::size_t T, std::size_t cin, const double* w, const double* b, std::size_t cout,
                  std::size_t kw, double* z) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kw / 2);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = b[o];
      for (std::size_t k = 0; k < kw; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - pad;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
        const double* wk = w + (o * kw + k) * cin;
        const double* xs = x + static_cast<std::size_t>(src) * cin;
        for (std::size_t c = 0; c < cin; ++c) acc += wk[c] * xs[c];
      }
      z[t * cout + o] = acc;
    }
  }
}

}  // namespace

std::size_t TcnShape::param_count() const noexcept {
  std::size_t n = 0;
  std::size_t cin = input_channels;
  for (std::size_t w : widths) {
    n += w * kernel * cin + w;
    cin = w;
  }
  return n + num_classes * flat_size() + num_classes;
}

void TcnShape::validate() const {
  if (input_channels == 0) throw std::invalid_argument("TCN needs at least one input channel");
  if (widths.empty()) throw std::invalid_argument("TCN needs at least one conv layer");
  if (kernel == 0 || kernel % 2 == 0) throw std::invalid_argument("TCN kernel width must be odd");
  if (widths.size() >= 8 * sizeof(std::size_t) || (seq_len % (std::size_t{1} << widths.size())) != 0 ||
      final_len() == 0) {
    throw std::invalid_argument("TCN sequence length must be divisible by 2^layers");
  }
  if (num_classes == 0) throw std::invalid_argument("TCN needs at least one class");
}

struct TcnModel::Cache {
  std::vector<std::vector<double>> inputs;  // X_l, T_l x C_l
  std::vector<std::vector<double>> pre;     // Z_l, T_l x C_out
  std::vector<std::vector<unsigned char>> pick;  // which of the two pooled rows won
  std::vector<double> flat;                 // after the head ReLU
};

TcnModel::TcnModel(TcnShape shape) : shape_(std::move(shape)) {
  shape_.validate();
  params_.assign(shape_.param_count(), 0.0);
}

TcnModel TcnModel::random(TcnShape shape, std::uint64_t seed) {
  TcnModel m(std::move(shape));
  std::mt19937_64 rng(seed);
  std::size_t cin = m.shape_.input_channels;
  for (std::size_t l = 0; l < m.shape_.widths.size(); ++l) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cin * m.shape_.kernel));
    for (auto& v : m.conv_weight(l)) v = bound * u(rng);
    for (auto& v : m.conv_bias(l)) v = bound * u(rng);
    cin = m.shape_.widths[l];
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.shape_.flat_size()));
  for (auto& v : m.head_weight()) v = bound * u(rng);
  for (auto& v : m.head_bias()) v = bound * u(rng);
  return m;
}

std::size_t TcnModel::layer_offset(std::size_t layer) const {
  std::size_t off = 0;
  std::size_t cin = shape_.input_channels;
  for (std::size_t l = 0; l < layer; ++l) {
    off += shape_.widths[l] * shape_.kernel * cin + shape_.widths[l];
    cin = shape_.widths[l];
  }
  return off;
}

std::size_t TcnModel::head_offset() const { return layer_offset(shape_.widths.size()); }

std::span<double> TcnModel::conv_weight(std::size_t layer) {
  const std::size_t cin = layer == 0 ? shape_.input_channels : shape_.widths.at(layer - 1);
  return {params_.data() + layer_offset(layer), shape_.widths.at(layer) * shape_.kernel * cin};
}

std::span<double> TcnModel::conv_bias(std::size_t layer) {
  const auto w = conv_weight(layer);
  return {w.data() + w.size(), shape_.widths.at(layer)};
}

std::span<double> TcnModel::head_weight() {
  return {params_.data() + head_offset(), shape_.num_classes * shape_.flat_size()};
}

std::span<double> TcnModel::head_bias() {
  return {params_.data() + head_offset() + shape_.num_classes * shape_.flat_size(), shape_.num_classes};
}

void TcnModel::check_input(const FeatureMatrix& x) const {
  if (x.cols != shape_.input_channels || x.rows != shape_.seq_len) {
    throw DimensionMismatch("TCN expects " + std::to_string(shape_.seq_len) + " x " +
                            std::to_string(shape_.input_channels) + " input, got " + std::to_string(x.rows) + " x " +
                            std::to_string(x.cols));
  }
}

std::vector<double> TcnModel::run(const FeatureMatrix& x, Cache* cache) const {
  check_input(x);
  const std::size_t L = shape_.widths.size();
  const std::size_t kw = shape_.kernel;
  std::vector<double> cur = x.values;
  std::size_t T = shape_.seq_len;
  std::size_t cin = shape_.input_channels;
  std::vector<double> z, pooled;
  if (cache) {
    cache->inputs.resize(L);
    cache->pre.resize(L);
    cache->pick.resize(L);
  }
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t cout = shape_.widths[l];
    const double* w = params_.data() + layer_offset(l);
    const double* b = w + cout * kw * cin;
    z.assign(T * cout, 0.0);
    conv_forward(cur.data(), T, cin, w, b, cout, kw, z.data());
    const std::size_t half = T / 2;
    pooled.assign(half * cout, 0.0);
    std::vector<unsigned char> pick(cache ? half * cout : 0);
    for (std::size_t t = 0; t < half; ++t) {
      for (std::size_t o = 0; o < cout; ++o) {
        const double a = std::max(z[2 * t * cout + o], 0.0);
        const double c = std::max(z[(2 * t + 1) * cout + o], 0.0);
        pooled[t * cout + o] = a >= c ? a : c;
        if (cache) pick[t * cout + o] = a >= c ? 0 : 1;
      }
    }
    if (cache) {
      cache->inputs[l] = std::move(cur);
      cache->pre[l] = z;
      cache->pick[l] = std::move(pick);
    }
    cur = pooled;
    T = half;
    cin = cout;
  }
  for (auto& v : cur) v = std::max(v, 0.0);
  const std::size_t flat = shape_.flat_size();
  const double* hw = params_.data() + head_offset();
  const double* hb = hw + shape_.num_classes * flat;
  std::vector<double> logits(shape_.num_classes);
  for (std::size_t k = 0; k < shape_.num_classes; ++k) {
    double acc = hb[k];
    const double* row = hw + k * flat;
    for (std::size_t i = 0; i < flat; ++i) acc += row[i] * cur[i];
    logits[k] = acc;
  }
  if (cache) cache->flat = std::move(cur);
  return logits;
}

std::vector<double> TcnModel::forward(const FeatureMatrix& x) const { return run(x, nullptr); }

double TcnModel::loss(const FeatureMatrix& x, std::size_t label) const {
  return softmax_cross_entropy(forward(x), label);
}

std::vector<double> TcnModel::final_activations(const FeatureMatrix& x) const {
  Cache cache;
  run(x, &cache);
  return cache.flat;
}

double TcnModel::loss_gradient(const FeatureMatrix& x, std::size_t label, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw DimensionMismatch("gradient buffer has the wrong size");
  if (label >= shape_.num_classes) throw std::invalid_argument("label out of range");
  Cache cache;
  const auto logits = run(x, &cache);
  const double loss = softmax_cross_entropy(logits, label);
  auto dlogits = softmax(logits);
  dlogits[label] -= 1.0;

  const std::size_t L = shape_.widths.size();
  const std::size_t kw = shape_.kernel;
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kw / 2);
  const std::size_t flat = shape_.flat_size();

  // Head.
  const double* hw = params_.data() + head_offset();
  double* ghw = grad.data() + head_offset();
  double* ghb = ghw + shape_.num_classes * flat;
  std::vector<double> dcur(flat, 0.0);
  for (std::size_t k = 0; k < shape_.num_classes; ++k) {
    const double g = dlogits[k];
    ghb[k] += g;
    for (std::size_t i = 0; i < flat; ++i) {
      ghw[k * flat + i] += g * cache.flat[i];
      dcur[i] += g * hw[k * flat + i];
    }
  }
  for (std::size_t i = 0; i < flat; ++i) {
    if (!(cache.flat[i] > 0.0)) dcur[i] = 0.0;
  }

  // Conv blocks, top to bottom. dcur holds d loss / d pooled output.
  std::vector<double> dz, dx;
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t cout = shape_.widths[l];
    const std::size_t cin = l == 0 ? shape_.input_channels : shape_.widths[l - 1];
    const std::size_t T = shape_.seq_len >> l;
    const auto& z = cache.pre[l];
    const auto& xin = cache.inputs[l];
    const auto& pick = cache.pick[l];
    dz.assign(T * cout, 0.0);
    for (std::size_t t = 0; t < T / 2; ++t) {
      for (std::size_t o = 0; o < cout; ++o) {
        const std::size_t src = (2 * t + pick[t * cout + o]) * cout + o;
        if (z[src] > 0.0) dz[src] = dcur[t * cout + o];
      }
    }
    const double* w = params_.data() + layer_offset(l);
    double* gw = grad.data() + layer_offset(l);
    double* gb = gw + cout * kw * cin;
    const bool need_dx = l > 0;
    if (need_dx) dx.assign(T * cin, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t o = 0; o < cout; ++o) {
        const double g = dz[t * cout + o];
        if (g == 0.0) continue;
        gb[o] += g;
        for (std::size_t k = 0; k < kw; ++k) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - pad;
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
          const std::size_t s = static_cast<std::size_t>(src);
          double* gwk = gw + (o * kw + k) * cin;
          const double* xs = xin.data() + s * cin;
          for (std::size_t c = 0; c < cin; ++c) gwk[c] += g * xs[c];
          if (need_dx) {
            const double* wk = w + (o * kw + k) * cin;
            double* dxs = dx.data() + s * cin;
            for (std::size_t c = 0; c < cin; ++c) dxs[c] += g * wk[c];
          }
        }
      }
    }
    if (need_dx) dcur.swap(dx);
  }
  return loss;
}

}  // namespace haptix::nn

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "haptix/nn.hpp"

namespace haptix::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::size_t LstmShape::param_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? input_channels : hidden;
    n += 4 * hidden * (in + hidden + 1);
  }
  return n + num_classes * (hidden + 1);
}

void LstmShape::validate() const {
  if (input_channels == 0) throw std::invalid_argument("LSTM needs at least one input channel");
  if (hidden == 0 || layers == 0) throw std::invalid_argument("LSTM needs hidden size and depth >= 1");
  if (num_classes == 0) throw std::invalid_argument("LSTM needs at least one class");
}

struct LstmModel::Cache {
  // Per layer, per step: gate activations (4H: i, f, g, o), cell, tanh(cell), hidden.
  std::vector<std::vector<double>> gates;
  std::vector<std::vector<double>> cell;
  std::vector<std::vector<double>> cell_tanh;
  std::vector<std::vector<double>> hidden;
  std::vector<std::vector<double>> step_logits;  // per-step head outputs (per_step_loss only)
};

LstmModel::LstmModel(LstmShape shape) : shape_(shape) {
  shape_.validate();
  params_.assign(shape_.param_count(), 0.0);
}

LstmModel LstmModel::random(LstmShape shape, std::uint64_t seed) {
  LstmModel m(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.shape_.hidden));
  for (auto& v : m.params_) v = bound * u(rng);
  return m;
}

std::size_t LstmModel::layer_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += 4 * shape_.hidden * (layer_input(l) + shape_.hidden + 1);
  return off;
}

std::size_t LstmModel::head_offset() const { return layer_offset(shape_.layers); }

std::span<double> LstmModel::input_weight(std::size_t layer) {
  if (layer >= shape_.layers) throw std::out_of_range("LSTM layer index");
  return {params_.data() + layer_offset(layer), 4 * shape_.hidden * layer_input(layer)};
}

std::span<double> LstmModel::recurrent_weight(std::size_t layer) {
  const auto w = input_weight(layer);
  return {w.data() + w.size(), 4 * shape_.hidden * shape_.hidden};
}

std::span<double> LstmModel::bias(std::size_t layer) {
  const auto u = recurrent_weight(layer);
  return {u.data() + u.size(), 4 * shape_.hidden};
}

std::span<double> LstmModel::head_weight() {
  return {params_.data() + head_offset(), shape_.num_classes * shape_.hidden};
}

std::span<double> LstmModel::head_bias() {
  return {params_.data() + head_offset() + shape_.num_classes * shape_.hidden, shape_.num_classes};
}

void LstmModel::check_input(const FeatureMatrix& x) const {
  if (x.cols != shape_.input_channels) {
    throw DimensionMismatch("LSTM expects " + std::to_string(shape_.input_channels) + " channels, got " +
                            std::to_string(x.cols));
  }
  if (x.rows == 0) throw DimensionMismatch("LSTM input sequence is empty");
}

std::vector<double> LstmModel::run(const FeatureMatrix& x, Cache* cache) const {
  check_input(x);
  const std::size_t H = shape_.hidden;
  const std::size_t T = x.rows;
  const std::size_t nc = shape_.num_classes;
  std::vector<double> input = x.values;  // T x in for the current layer
  std::vector<double> a(4 * H);
  if (cache) {
    cache->gates.resize(shape_.layers);
    cache->cell.resize(shape_.layers);
    cache->cell_tanh.resize(shape_.layers);
    cache->hidden.resize(shape_.layers);
  }
  for (std::size_t l = 0; l < shape_.layers; ++l) {
    const std::size_t in = layer_input(l);
    const double* W = params_.data() + layer_offset(l);
    const double* U = W + 4 * H * in;
    const double* b = U + 4 * H * H;
    std::vector<double> h(T * H, 0.0), c(T * H, 0.0), ct(T * H, 0.0), gates(T * 4 * H, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const double* xt = input.data() + t * in;
      const double* hprev = t > 0 ? h.data() + (t - 1) * H : nullptr;
      const double* cprev = t > 0 ? c.data() + (t - 1) * H : nullptr;
      for (std::size_t r = 0; r < 4 * H; ++r) {
        double acc = b[r];
        const double* wr = W + r * in;
        for (std::size_t j = 0; j < in; ++j) acc += wr[j] * xt[j];
        if (hprev) {
          const double* ur = U + r * H;
          for (std::size_t j = 0; j < H; ++j) acc += ur[j] * hprev[j];
        }
        a[r] = acc;
      }
      double* g = gates.data() + t * 4 * H;
      for (std::size_t k = 0; k < H; ++k) {
        const double ig = sigmoid(a[k]);
        const double fg = sigmoid(a[H + k]);
        const double cg = std::tanh(a[2 * H + k]);
        const double og = sigmoid(a[3 * H + k]);
        g[k] = ig;
        g[H + k] = fg;
        g[2 * H + k] = cg;
        g[3 * H + k] = og;
        const double cell = (cprev ? fg * cprev[k] : 0.0) + ig * cg;
        const double th = std::tanh(cell);
        c[t * H + k] = cell;
        ct[t * H + k] = th;
        h[t * H + k] = og * th;
      }
    }
    if (cache) {
      cache->gates[l] = std::move(gates);
      cache->cell[l] = std::move(c);
      cache->cell_tanh[l] = std::move(ct);
      cache->hidden[l] = h;
    }
    input = std::move(h);
  }

  const double* hw = params_.data() + head_offset();
  const double* hb = hw + nc * H;
  auto head = [&](const double* ht) {
    std::vector<double> logits(nc);
    for (std::size_t k = 0; k < nc; ++k) {
      double acc = hb[k];
      for (std::size_t j = 0; j < H; ++j) acc += hw[k * H + j] * std::max(ht[j], 0.0);
      logits[k] = acc;
    }
    return logits;
  };
  if (cache && shape_.per_step_loss) {
    cache->step_logits.resize(T);
    for (std::size_t t = 0; t < T; ++t) cache->step_logits[t] = head(input.data() + t * H);
  }
  return head(input.data() + (T - 1) * H);
}

std::vector<double> LstmModel::forward(const FeatureMatrix& x) const { return run(x, nullptr); }

double LstmModel::loss(const FeatureMatrix& x, std::size_t label) const {
  if (!shape_.per_step_loss) return softmax_cross_entropy(forward(x), label);
  Cache cache;
  run(x, &cache);
  double total = 0.0;
  for (const auto& lg : cache.step_logits) total += softmax_cross_entropy(lg, label);
  return total / static_cast<double>(cache.step_logits.size());
}

double LstmModel::loss_gradient(const FeatureMatrix& x, std::size_t label, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw DimensionMismatch("gradient buffer has the wrong size");
  if (label >= shape_.num_classes) throw std::invalid_argument("label out of range");
  Cache cache;
  const auto final_logits = run(x, &cache);
  const std::size_t H = shape_.hidden;
  const std::size_t T = x.rows;
  const std::size_t nc = shape_.num_classes;
  const std::size_t top = shape_.layers - 1;

  // d loss / d h of the top layer, T x H.
  std::vector<double> dh_ext(T * H, 0.0);
  const double* hw = params_.data() + head_offset();
  double* ghw = grad.data() + head_offset();
  double* ghb = ghw + nc * H;
  double loss = 0.0;
  auto head_backward = [&](const std::vector<double>& logits, std::size_t t, double scale) {
    auto d = softmax(logits);
    d[label] -= 1.0;
    const double* ht = cache.hidden[top].data() + t * H;
    double* dht = dh_ext.data() + t * H;
    for (std::size_t k = 0; k < nc; ++k) {
      const double g = scale * d[k];
      ghb[k] += g;
      for (std::size_t j = 0; j < H; ++j) {
        if (ht[j] > 0.0) {
          ghw[k * H + j] += g * ht[j];
          dht[j] += g * hw[k * H + j];
        }
      }
    }
  };
  if (shape_.per_step_loss) {
    const double scale = 1.0 / static_cast<double>(T);
    for (std::size_t t = 0; t < T; ++t) {
      loss += softmax_cross_entropy(cache.step_logits[t], label);
      head_backward(cache.step_logits[t], t, scale);
    }
    loss *= scale;
  } else {
    loss = softmax_cross_entropy(final_logits, label);
    head_backward(final_logits, T - 1, 1.0);
  }

  std::vector<double> da(4 * H), dh(H), dh_next(H), dc_next(H), dx;
  for (std::size_t l = shape_.layers; l-- > 0;) {
    const std::size_t in = layer_input(l);
    const double* W = params_.data() + layer_offset(l);
    const double* U = W + 4 * H * in;
    double* gW = grad.data() + layer_offset(l);
    double* gU = gW + 4 * H * in;
    double* gb = gU + 4 * H * H;
    const auto& gates = cache.gates[l];
    const auto& cell = cache.cell[l];
    const auto& ct = cache.cell_tanh[l];
    const auto& hid = cache.hidden[l];
    const double* layer_in = l == 0 ? x.values.data() : cache.hidden[l - 1].data();
    const bool need_dx = l > 0;
    if (need_dx) dx.assign(T * in, 0.0);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::fill(dc_next.begin(), dc_next.end(), 0.0);
    for (std::size_t t = T; t-- > 0;) {
      const double* g = gates.data() + t * 4 * H;
      for (std::size_t k = 0; k < H; ++k) {
        dh[k] = dh_ext[t * H + k] + dh_next[k];
        const double ig = g[k], fg = g[H + k], cg = g[2 * H + k], og = g[3 * H + k];
        const double th = ct[t * H + k];
        const double dout = dh[k] * th;
        const double dc = dh[k] * og * (1.0 - th * th) + dc_next[k];
        const double cprev = t > 0 ? cell[(t - 1) * H + k] : 0.0;
        da[k] = dc * cg * ig * (1.0 - ig);
        da[H + k] = dc * cprev * fg * (1.0 - fg);
        da[2 * H + k] = dc * ig * (1.0 - cg * cg);
        da[3 * H + k] = dout * og * (1.0 - og);
        dc_next[k] = dc * fg;
      }
      const double* xt = layer_in + t * in;
      const double* hprev = t > 0 ? hid.data() + (t - 1) * H : nullptr;
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      double* dxt = need_dx ? dx.data() + t * in : nullptr;
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double d = da[r];
        if (d == 0.0) continue;
        gb[r] += d;
        double* gwr = gW + r * in;
        const double* wr = W + r * in;
        for (std::size_t j = 0; j < in; ++j) gwr[j] += d * xt[j];
        if (dxt) {
          for (std::size_t j = 0; j < in; ++j) dxt[j] += d * wr[j];
        }
        if (hprev) {
          double* gur = gU + r * H;
          const double* ur = U + r * H;
          for (std::size_t j = 0; j < H; ++j) {
            gur[j] += d * hprev[j];
            dh_next[j] += d * ur[j];
          }
        }
      }
    }
    if (need_dx) dh_ext.swap(dx);
  }
  return loss;
}

}  // namespace haptix::nn

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "haptix/nn.hpp"

namespace haptix::nn {

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) s += (p[i] = std::exp(logits[i] - m));
  for (auto& v : p) v /= s;
  return p;
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) throw std::invalid_argument("cross_entropy: label out of range");
  return -std::log(std::max(probs[label], kProbClamp));
}

double softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) throw std::invalid_argument("softmax_cross_entropy: label out of range");
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - m);
  return m + std::log(s) - logits[label];
}

namespace {

// L(a) - L(b) for the softmax cross-entropy, from the logit differences so
// that nearby losses do not cancel.
double cross_entropy_difference(std::span<const double> a, std::span<const double> b, std::size_t label) {
  const double m = *std::max_element(b.begin(), b.end());
  double sum = 0.0, delta = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const double e = std::exp(b[k] - m);
    sum += e;
    delta += e * std::expm1(a[k] - b[k]);
  }
  return std::log1p(delta / sum) - (a[label] - b[label]);
}

template <class M>
bool loss_from_final_logits(const M&) {
  return true;
}

bool loss_from_final_logits(const LstmModel& m) { return !m.shape().per_step_loss; }

}  // namespace

std::size_t predict(std::span<const double> logits) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

// --- Linear baseline --------------------------------------------------------

LinearModel::LinearModel(LinearShape shape) : shape_(shape) {
  if (shape_.input_channels == 0 || shape_.seq_len == 0 || shape_.num_classes == 0) {
    throw std::invalid_argument("linear model needs non-empty shape");
  }
  params_.assign(shape_.param_count(), 0.0);
}

LinearModel LinearModel::random(LinearShape shape, std::uint64_t seed) {
  LinearModel m(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(shape.input_channels * shape.seq_len));
  for (auto& v : m.params_) v = bound * u(rng);
  return m;
}

std::vector<double> LinearModel::forward(const FeatureMatrix& x) const {
  if (x.cols != shape_.input_channels || x.rows != shape_.seq_len) {
    throw DimensionMismatch("linear model input has the wrong shape");
  }
  const std::size_t d = shape_.input_channels * shape_.seq_len;
  std::vector<double> logits(shape_.num_classes);
  for (std::size_t k = 0; k < shape_.num_classes; ++k) {
    const double* w = params_.data() + k * d;
    double acc = params_[shape_.num_classes * d + k];
    for (std::size_t c = 0; c < x.cols; ++c) {
      for (std::size_t r = 0; r < x.rows; ++r) acc += w[c * x.rows + r] * x(r, c);
    }
    logits[k] = acc;
  }
  return logits;
}

double LinearModel::loss(const FeatureMatrix& x, std::size_t label) const {
  return softmax_cross_entropy(forward(x), label);
}

double LinearModel::loss_gradient(const FeatureMatrix& x, std::size_t label, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw DimensionMismatch("gradient buffer has the wrong size");
  const auto logits = forward(x);
  auto d = softmax(logits);
  d[label] -= 1.0;
  const std::size_t dim = shape_.input_channels * shape_.seq_len;
  for (std::size_t k = 0; k < shape_.num_classes; ++k) {
    double* g = grad.data() + k * dim;
    for (std::size_t c = 0; c < x.cols; ++c) {
      for (std::size_t r = 0; r < x.rows; ++r) g[c * x.rows + r] += d[k] * x(r, c);
    }
    grad[shape_.num_classes * dim + k] += d[k];
  }
  return softmax_cross_entropy(logits, label);
}

// --- Training ---------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be finite and non-negative");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

template <SequenceModel M>
double batch_gradient(const M& model, std::span<const FeatureMatrix> data, std::span<const std::size_t> indices,
                      std::span<double> grad, Exec exec) {
  const std::size_t P = model.params().size();
  if (grad.size() != P) throw DimensionMismatch("gradient buffer has the wrong size");
  std::fill(grad.begin(), grad.end(), 0.0);
  if (indices.empty()) return 0.0;
  const std::size_t B = indices.size();
  std::vector<std::vector<double>> per_sample(B);
  std::vector<double> losses(B, 0.0);
  parallel_for(B, exec, [&](std::size_t i) {
    const FeatureMatrix& x = data[indices[i]];
    if (!x.label) throw DataError("training matrix '" + x.trial_id + "' has no label");
    per_sample[i].assign(P, 0.0);
    losses[i] = model.loss_gradient(x, class_index(*x.label), per_sample[i]);
  });
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(B);
  for (std::size_t i = 0; i < B; ++i) {
    loss += losses[i];
    const auto& g = per_sample[i];
    for (std::size_t p = 0; p < P; ++p) grad[p] += g[p];
  }
  for (auto& g : grad) g *= inv;
  return loss * inv;
}

template <SequenceModel M>
TrainResult<M> train(M model, std::span<const FeatureMatrix> data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw EmptyTrainingSet();
  // Shape check up front so a mismatch is reported before any update.
  (void)model.forward(data.front());

  auto& params = model.params();
  const std::size_t P = params.size();
  std::vector<double> grad(P), m1(P, 0.0), m2(P, 0.0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);

  TrainResult<M> res;
  res.loss_curve.reserve(cfg.epochs);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const double loss = batch_gradient(model, data, batch, grad, cfg.exec);
      if (!std::isfinite(loss)) {
        throw NonFiniteLoss("non-finite training loss at epoch " + std::to_string(epoch + 1) + ", batch starting at " +
                            std::to_string(start));
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      ++step;
      if (cfg.optimizer == Optimizer::Sgd) {
        for (std::size_t p = 0; p < P; ++p) params[p] -= cfg.learning_rate * grad[p];
      } else {
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
        for (std::size_t p = 0; p < P; ++p) {
          m1[p] = cfg.beta1 * m1[p] + (1.0 - cfg.beta1) * grad[p];
          m2[p] = cfg.beta2 * m2[p] + (1.0 - cfg.beta2) * grad[p] * grad[p];
          params[p] -= cfg.learning_rate * (m1[p] / c1) / (std::sqrt(m2[p] / c2) + cfg.epsilon);
        }
      }
    }
    res.loss_curve.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  res.model = std::move(model);
  return res;
}

template <SequenceModel M>
GradCheckResult grad_check(const M& model, const FeatureMatrix& sample, std::size_t label, double eps,
                           std::size_t count, std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  M probe = model;
  auto& params = probe.params();
  const std::size_t P = params.size();
  std::vector<double> analytic(P, 0.0);
  model.loss_gradient(sample, label, analytic);

  std::vector<std::size_t> idx(P);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t n = std::min(count, P);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, P - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }

  const bool exact_diff = loss_from_final_logits(model);
  GradCheckResult res;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = idx[i];
    const double saved = params[p];
    double diff;
    if (exact_diff) {
      params[p] = saved + eps;
      const auto up = probe.forward(sample);
      params[p] = saved - eps;
      diff = cross_entropy_difference(up, probe.forward(sample), label);
    } else {
      params[p] = saved + eps;
      const double up = probe.loss(sample, label);
      params[p] = saved - eps;
      diff = up - probe.loss(sample, label);
    }
    params[p] = saved;
    const double numeric = diff / (2.0 * eps);
    const double a = analytic[p];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (res.checked == 0 || rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_index = p;
    }
    ++res.checked;
  }
  return res;
}

template double batch_gradient<TcnModel>(const TcnModel&, std::span<const FeatureMatrix>, std::span<const std::size_t>,
                                         std::span<double>, Exec);
template double batch_gradient<LstmModel>(const LstmModel&, std::span<const FeatureMatrix>,
                                          std::span<const std::size_t>, std::span<double>, Exec);
template double batch_gradient<LinearModel>(const LinearModel&, std::span<const FeatureMatrix>,
                                            std::span<const std::size_t>, std::span<double>, Exec);
template TrainResult<TcnModel> train<TcnModel>(TcnModel, std::span<const FeatureMatrix>, const TrainConfig&);
template TrainResult<LstmModel> train<LstmModel>(LstmModel, std::span<const FeatureMatrix>, const TrainConfig&);
template TrainResult<LinearModel> train<LinearModel>(LinearModel, std::span<const FeatureMatrix>, const TrainConfig&);
template GradCheckResult grad_check<TcnModel>(const TcnModel&, const FeatureMatrix&, std::size_t, double, std::size_t,
                                              std::uint64_t);
template GradCheckResult grad_check<LstmModel>(const LstmModel&, const FeatureMatrix&, std::size_t, double,
                                               std::size_t, std::uint64_t);
template GradCheckResult grad_check<LinearModel>(const LinearModel&, const FeatureMatrix&, std::size_t, double,
                                                 std::size_t, std::uint64_t);

// --- Serialisation ----------------------------------------------------------

nlohmann::json to_json(const TcnModel& m) {
  const auto& s = m.shape();
  return {{"type", "tcn"},
          {"shape",
           {{"input_channels", s.input_channels},
            {"seq_len", s.seq_len},
            {"widths", s.widths},
            {"kernel", s.kernel},
            {"num_classes", s.num_classes}}},
          {"params", m.params()}};
}

nlohmann::json to_json(const LstmModel& m) {
  const auto& s = m.shape();
  return {{"type", "lstm"},
          {"shape",
           {{"input_channels", s.input_channels},
            {"hidden", s.hidden},
            {"layers", s.layers},
            {"num_classes", s.num_classes},
            {"per_step_loss", s.per_step_loss}}},
          {"params", m.params()}};
}

nlohmann::json to_json(const LinearModel& m) {
  const auto& s = m.shape();
  return {{"type", "linear"},
          {"shape", {{"input_channels", s.input_channels}, {"seq_len", s.seq_len}, {"num_classes", s.num_classes}}},
          {"params", m.params()}};
}

TcnModel tcn_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type") != "tcn") throw DataError("model JSON is not a TCN");
    const auto& s = j.at("shape");
    TcnShape shape;
    shape.input_channels = s.at("input_channels").get<std::size_t>();
    shape.seq_len = s.at("seq_len").get<std::size_t>();
    shape.widths = s.at("widths").get<std::vector<std::size_t>>();
    shape.kernel = s.at("kernel").get<std::size_t>();
    shape.num_classes = s.at("num_classes").get<std::size_t>();
    TcnModel m(shape);
    auto p = j.at("params").get<std::vector<double>>();
    if (p.size() != m.params().size()) throw DimensionMismatch("TCN parameter count does not match its shape");
    m.params() = std::move(p);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid TCN JSON: ") + e.what());
  }
}

LstmModel lstm_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type") != "lstm") throw DataError("model JSON is not an LSTM");
    const auto& s = j.at("shape");
    LstmShape shape;
    shape.input_channels = s.at("input_channels").get<std::size_t>();
    shape.hidden = s.at("hidden").get<std::size_t>();
    shape.layers = s.at("layers").get<std::size_t>();
    shape.num_classes = s.at("num_classes").get<std::size_t>();
    shape.per_step_loss = s.value("per_step_loss", false);
    LstmModel m(shape);
    auto p = j.at("params").get<std::vector<double>>();
    if (p.size() != m.params().size()) throw DimensionMismatch("LSTM parameter count does not match its shape");
    m.params() = std::move(p);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid LSTM JSON: ") + e.what());
  }
}

std::string loss_curve_csv(std::span<const double> curve) {
  std::ostringstream out;
  out << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t e = 0; e < curve.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, curve[e]);
    out << buf;
  }
  return out.str();
}

}  // namespace haptix::nn

#include "haptix/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace haptix::hmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;

double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

void check_dims(const HmmModel& model, const FeatureMatrix& obs) {
  if (obs.cols != model.features) {
    throw DimensionMismatch("observation has " + std::to_string(obs.cols) + " channels, model expects " +
                            std::to_string(model.features));
  }
  if (!model.channel_names.empty() && !obs.channel_names.empty() && model.channel_names != obs.channel_names) {
    throw DimensionMismatch("observation channels differ from the model's");
  }
  if (obs.rows == 0) throw DimensionMismatch("observation sequence is empty");
}

std::vector<double> log_of(const std::vector<double>& p) {
  std::vector<double> out(p.size());
  std::transform(p.begin(), p.end(), out.begin(), [](double x) { return x > 0.0 ? std::log(x) : kNegInf; });
  return out;
}

// Per-state log emission densities for every row: out[t * K + k].
std::vector<double> emission_table(const HmmModel& m, const FeatureMatrix& obs) {
  std::vector<double> out(obs.rows * m.states);
  for (std::size_t t = 0; t < obs.rows; ++t) {
    for (std::size_t k = 0; k < m.states; ++k) out[t * m.states + k] = log_emission(m, k, obs.row(t));
  }
  return out;
}

// Log-space forward variables; returns log P(obs).
double forward_pass(const HmmModel& m, const std::vector<double>& log_a, const std::vector<double>& log_pi,
                    const std::vector<double>& log_b, std::size_t T, std::vector<double>& alpha) {
  const std::size_t K = m.states;
  alpha.assign(T * K, kNegInf);
  for (std::size_t k = 0; k < K; ++k) alpha[k] = log_pi[k] + log_b[k];
  std::vector<double> terms(K);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t i = 0; i < K; ++i) terms[i] = alpha[(t - 1) * K + i] + log_a[i * K + j];
      alpha[t * K + j] = log_b[t * K + j] + log_sum_exp(terms);
    }
  }
  return log_sum_exp(std::span<const double>(alpha).subspan((T - 1) * K, K));
}

struct SequenceStats {
  double loglik = 0.0;
  std::vector<double> gamma;  // T x K posteriors
  std::vector<double> xi;     // K x K expected transition counts
};

SequenceStats expectation(const HmmModel& m, const std::vector<double>& log_a, const std::vector<double>& log_pi,
                          const FeatureMatrix& obs) {
  const std::size_t K = m.states;
  const std::size_t T = obs.rows;
  const auto log_b = emission_table(m, obs);
  std::vector<double> alpha;
  SequenceStats st;
  st.loglik = forward_pass(m, log_a, log_pi, log_b, T, alpha);

  std::vector<double> beta(T * K, 0.0);
  std::vector<double> terms(K);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        terms[j] = log_a[i * K + j] + log_b[(t + 1) * K + j] + beta[(t + 1) * K + j];
      }
      beta[t * K + i] = log_sum_exp(terms);
    }
  }

  st.gamma.resize(T * K);
  for (std::size_t i = 0; i < T * K; ++i) st.gamma[i] = std::exp(alpha[i] + beta[i] - st.loglik);
  st.xi.assign(K * K, 0.0);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        const double lx =
            alpha[t * K + i] + log_a[i * K + j] + log_b[(t + 1) * K + j] + beta[(t + 1) * K + j] - st.loglik;
        st.xi[i * K + j] += std::exp(lx);
      }
    }
  }
  return st;
}

void check_training_set(std::span<const FeatureMatrix> trials) {
  if (trials.empty()) throw EmptyTrainingSet();
  const std::size_t F = trials.front().cols;
  for (const auto& fm : trials) {
    if (fm.cols != F || fm.channel_names != trials.front().channel_names) {
      throw DimensionMismatch("training sequences disagree on channels");
    }
    if (fm.rows == 0) throw DimensionMismatch("training sequence is empty");
  }
  if (F == 0) throw DimensionMismatch("training sequences have no channels");
}

}  // namespace

void HmmModel::validate() const {
  const std::size_t K = states;
  if (K == 0 || transition.size() != K * K || initial.size() != K || means.size() != K * features ||
      variances.size() != K * features) {
    throw DimensionMismatch("HMM parameter arrays have inconsistent sizes");
  }
  auto stochastic = [](std::span<const double> row) {
    double s = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) return false;
      s += p;
    }
    return std::abs(s - 1.0) <= 1e-9;
  };
  for (std::size_t i = 0; i < K; ++i) {
    if (!stochastic(std::span<const double>(transition).subspan(i * K, K))) {
      throw DataError("HMM transition row " + std::to_string(i) + " is not a distribution");
    }
  }
  if (!stochastic(initial)) throw DataError("HMM initial distribution is not a distribution");
  for (double v : variances) {
    if (!(v >= kVarianceFloor) || !std::isfinite(v)) throw DataError("HMM variance below floor or non-finite");
  }
  for (double mu : means) {
    if (!std::isfinite(mu)) throw DataError("HMM mean is non-finite");
  }
}

double log_emission(const HmmModel& m, std::size_t state, std::span<const double> row) {
  constexpr double log_two_pi = 1.8378770664093454835606594728112;  // log(2*pi)
  const double* mu = m.means.data() + state * m.features;
  const double* var = m.variances.data() + state * m.features;
  double acc = 0.0;
  for (std::size_t f = 0; f < m.features; ++f) {
    const double d = row[f] - mu[f];
    acc += log_two_pi + std::log(var[f]) + d * d / var[f];
  }
  return -0.5 * acc;
}

double forward_loglik(const HmmModel& model, const FeatureMatrix& obs) {
  check_dims(model, obs);
  std::vector<double> alpha;
  return forward_pass(model, log_of(model.transition), log_of(model.initial), emission_table(model, obs), obs.rows,
                      alpha);
}

HmmModel initial_model(std::span<const FeatureMatrix> trials, const BaumWelchOptions& opts) {
  check_training_set(trials);
  if (opts.states == 0) throw std::invalid_argument("baum_welch: state count must be >= 1");
  const std::size_t K = opts.states;
  const std::size_t F = trials.front().cols;

  HmmModel m;
  m.states = K;
  m.features = F;
  m.channel_names = trials.front().channel_names;
  m.initial.assign(K, 1.0 / static_cast<double>(K));

  // Pooled moments, two-pass.
  std::vector<double> mean(F, 0.0), var(F, 0.0);
  std::size_t n = 0;
  for (const auto& fm : trials) {
    for (std::size_t t = 0; t < fm.rows; ++t) {
      for (std::size_t f = 0; f < F; ++f) mean[f] += fm(t, f);
    }
    n += fm.rows;
  }
  for (auto& x : mean) x /= static_cast<double>(n);
  for (const auto& fm : trials) {
    for (std::size_t t = 0; t < fm.rows; ++t) {
      for (std::size_t f = 0; f < F; ++f) {
        const double d = fm(t, f) - mean[f];
        var[f] += d * d;
      }
    }
  }
  for (auto& v : var) v = std::max(v / static_cast<double>(n), kVarianceFloor);

  m.variances.resize(K * F);
  for (std::size_t k = 0; k < K; ++k) std::copy(var.begin(), var.end(), m.variances.begin() + k * F);
  m.means.assign(K * F, 0.0);
  m.transition.assign(K * K, 0.0);

  if (!opts.init_seed) {
    // Contiguous block split of every sequence; block k seeds state k.
    std::vector<std::size_t> counts(K, 0);
    for (const auto& fm : trials) {
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t lo = k * fm.rows / K;
        const std::size_t hi = (k + 1) * fm.rows / K;
        for (std::size_t t = lo; t < hi; ++t) {
          for (std::size_t f = 0; f < F; ++f) m.means[k * F + f] += fm(t, f);
        }
        counts[k] += hi - lo;
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t f = 0; f < F; ++f) {
        m.means[k * F + f] = counts[k] > 0 ? m.means[k * F + f] / static_cast<double>(counts[k]) : mean[f];
      }
    }
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        m.transition[i * K + j] = K == 1 ? 1.0 : (i == j ? 0.8 : 0.2 / static_cast<double>(K - 1));
      }
    }
  } else {
    std::mt19937_64 rng(*opts.init_seed);
    std::uniform_int_distribution<std::size_t> pick_seq(0, trials.size() - 1);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& fm = trials[pick_seq(rng)];
      std::uniform_int_distribution<std::size_t> pick_row(0, fm.rows - 1);
      const auto row = fm.row(pick_row(rng));
      std::copy(row.begin(), row.end(), m.means.begin() + k * F);
    }
    for (std::size_t i = 0; i < K; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < K; ++j) s += (m.transition[i * K + j] = unit(rng));
      for (std::size_t j = 0; j < K; ++j) m.transition[i * K + j] /= s;
    }
  }
  return m;
}

BaumWelchResult baum_welch(std::span<const FeatureMatrix> trials, const BaumWelchOptions& opts) {
  BaumWelchResult res;
  res.model = initial_model(trials, opts);
  HmmModel& m = res.model;
  const std::size_t K = m.states;
  const std::size_t F = m.features;
  const std::size_t S = trials.size();

  std::vector<SequenceStats> stats(S);
  double prev = kNegInf;
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    if (opts.on_iteration) opts.on_iteration(it, m);
    const auto log_a = log_of(m.transition);
    const auto log_pi = log_of(m.initial);
    parallel_for(S, opts.exec, [&](std::size_t s) { stats[s] = expectation(m, log_a, log_pi, trials[s]); });

    double total = 0.0;
    for (const auto& st : stats) total += st.loglik;
    if (!std::isfinite(total)) throw NonFiniteLoss("Baum-Welch: training log-likelihood is not finite");
    res.loglik_history.push_back(total);
    res.iterations = it;
    if (it > 0 && std::abs(total - prev) <= opts.tol * std::abs(prev)) {
      res.converged = true;
      break;
    }
    prev = total;

    // M-step. Sums run in sequence order so Serial and Parallel agree bitwise.
    std::vector<double> occupancy(K, 0.0), xi(K * K, 0.0), first(K, 0.0), weighted(K * F, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const auto& st = stats[s];
      const auto& fm = trials[s];
      for (std::size_t k = 0; k < K; ++k) first[k] += st.gamma[k];
      for (std::size_t i = 0; i < K * K; ++i) xi[i] += st.xi[i];
      for (std::size_t t = 0; t < fm.rows; ++t) {
        for (std::size_t k = 0; k < K; ++k) {
          const double g = st.gamma[t * K + k];
          occupancy[k] += g;
          for (std::size_t f = 0; f < F; ++f) weighted[k * F + f] += g * fm(t, f);
        }
      }
    }
    for (std::size_t i = 0; i < K; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < K; ++j) row += xi[i * K + j];
      if (row > kTiny) {
        for (std::size_t j = 0; j < K; ++j) m.transition[i * K + j] = xi[i * K + j] / row;
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (occupancy[k] <= kTiny) continue;
      for (std::size_t f = 0; f < F; ++f) m.means[k * F + f] = weighted[k * F + f] / occupancy[k];
    }
    std::vector<double> spread(K * F, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const auto& st = stats[s];
      const auto& fm = trials[s];
      for (std::size_t t = 0; t < fm.rows; ++t) {
        for (std::size_t k = 0; k < K; ++k) {
          const double g = st.gamma[t * K + k];
          for (std::size_t f = 0; f < F; ++f) {
            const double d = fm(t, f) - m.means[k * F + f];
            spread[k * F + f] += g * d * d;
          }
        }
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (occupancy[k] <= kTiny) continue;
      for (std::size_t f = 0; f < F; ++f) {
        m.variances[k * F + f] = std::max(spread[k * F + f] / occupancy[k], kVarianceFloor);
      }
    }
    if (opts.reestimate_initial) {
      for (std::size_t k = 0; k < K; ++k) m.initial[k] = first[k] / static_cast<double>(S);
    }
    res.iterations = it + 1;
  }
  if (opts.on_iteration) opts.on_iteration(res.iterations, m);
  return res;
}

HmmClassifier train_hmm_classifier(std::span<const FeatureMatrix> train, const BaumWelchOptions& opts) {
  if (train.empty()) throw EmptyTrainingSet();
  std::array<std::vector<FeatureMatrix>, kNumClasses> by_class;
  for (const auto& fm : train) {
    if (!fm.label) throw DataError("HMM training matrix has no label");
    by_class[class_index(*fm.label)].push_back(fm);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (by_class[c].empty()) throw MissingClass(c, std::string(to_string(class_at(c))));
  }
  HmmClassifier clf;
  BaumWelchOptions inner = opts;
  inner.on_iteration = nullptr;
  parallel_for(kNumClasses, opts.exec, [&](std::size_t c) { clf.models[c] = baum_welch(by_class[c], inner).model; });
  return clf;
}

HmmPrediction classify_hmm(const HmmClassifier& clf, const FeatureMatrix& obs) {
  HmmPrediction p{ComplianceClass::HardSkin, {}};
  for (std::size_t c = 0; c < kNumClasses; ++c) p.loglik[c] = forward_loglik(clf.models[c], obs);
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (p.loglik[c] > p.loglik[best]) best = c;
  }
  p.label = class_at(best);
  return p;
}

nlohmann::json to_json(const HmmModel& m) {
  nlohmann::json means = nlohmann::json::array();
  nlohmann::json vars = nlohmann::json::array();
  for (std::size_t k = 0; k < m.states; ++k) {
    means.push_back(std::vector<double>(m.means.begin() + k * m.features, m.means.begin() + (k + 1) * m.features));
    vars.push_back(
        std::vector<double>(m.variances.begin() + k * m.features, m.variances.begin() + (k + 1) * m.features));
  }
  return {{"K", m.states},  {"A", m.transition},        {"pi", m.initial},
          {"means", means}, {"variances", vars},        {"channel_names", m.channel_names}};
}

HmmModel model_from_json(const nlohmann::json& j) {
  HmmModel m;
  try {
    m.states = j.at("K").get<std::size_t>();
    m.transition = j.at("A").get<std::vector<double>>();
    m.initial = j.at("pi").get<std::vector<double>>();
    m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    const auto means = j.at("means").get<std::vector<std::vector<double>>>();
    const auto vars = j.at("variances").get<std::vector<std::vector<double>>>();
    m.features = means.empty() ? 0 : means.front().size();
    for (const auto& row : means) m.means.insert(m.means.end(), row.begin(), row.end());
    for (const auto& row : vars) m.variances.insert(m.variances.end(), row.begin(), row.end());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid HMM model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

nlohmann::json to_json(const HmmClassifier& clf) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) j[std::string(to_string(class_at(c)))] = to_json(clf.models[c]);
  return j;
}

HmmClassifier classifier_from_json(const nlohmann::json& j) {
  HmmClassifier clf;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::string key(to_string(class_at(c)));
    if (!j.contains(key)) throw DataError("HMM classifier JSON lacks class " + key);
    clf.models[c] = model_from_json(j.at(key));
  }
  return clf;
}

}  // namespace haptix::hmm

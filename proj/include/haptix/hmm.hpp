#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "haptix/core.hpp"
#include "haptix/parallel.hpp"
#include "haptix/preprocess.hpp"

namespace haptix::hmm {

inline constexpr double kVarianceFloor = 1e-6;

// Gaussian-emission HMM with diagonal covariances. Matrices are row-major:
// transition[i * K + j] = P(state j | state i), means[k * F + f].
struct HmmModel {
  std::size_t states = 0;
  std::size_t features = 0;
  std::vector<double> transition;
  std::vector<double> initial;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::string> channel_names;

  /// Checks stochasticity (1e-9), non-negativity and the variance floor.
  void validate() const;

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

/// Sum over channels of the log Gaussian density of one observation row in one state.
double log_emission(const HmmModel& model, std::size_t state, std::span<const double> row);

/// log P(obs | model) by the forward recursion in log space.
double forward_loglik(const HmmModel& model, const FeatureMatrix& obs);

struct BaumWelchOptions {
  std::size_t states = 3;
  std::size_t max_iter = 100;
  double tol = 1e-4;               // relative change of the total log-likelihood
  bool reestimate_initial = false;  // the initial distribution otherwise stays uniform
  // When set, means start at randomly chosen observation rows and transition
  // rows are random; otherwise initialisation is the deterministic block split.
  std::optional<std::uint64_t> init_seed;
  Exec exec = Exec::Parallel;
  // Called with the model at the start of every iteration (before its E-step)
  // and once with the final model.
  std::function<void(std::size_t iteration, const HmmModel&)> on_iteration;
};

struct BaumWelchResult {
  HmmModel model;
  std::vector<double> loglik_history;  // total training log-likelihood per E-step
  std::size_t iterations = 0;
  bool converged = false;
};

HmmModel initial_model(std::span<const FeatureMatrix> trials, const BaumWelchOptions& opts);

BaumWelchResult baum_welch(std::span<const FeatureMatrix> trials, const BaumWelchOptions& opts = {});

// One model per compliance class, all with the same state count and width.
struct HmmClassifier {
  std::array<HmmModel, kNumClasses> models;
};

/// Trains one model per class; matrices must carry labels. Throws MissingClass.
HmmClassifier train_hmm_classifier(std::span<const FeatureMatrix> train, const BaumWelchOptions& opts = {});

struct HmmPrediction {
  ComplianceClass label;
  std::array<double, kNumClasses> loglik;
};

/// argmax over per-class log-likelihoods; ties resolve to the earlier class.
HmmPrediction classify_hmm(const HmmClassifier& clf, const FeatureMatrix& obs);

nlohmann::json to_json(const HmmModel& model);
HmmModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HmmClassifier& clf);
HmmClassifier classifier_from_json(const nlohmann::json& j);

}  // namespace haptix::hmm

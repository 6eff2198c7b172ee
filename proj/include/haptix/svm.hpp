#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "haptix/core.hpp"
#include "haptix/parallel.hpp"
#include "haptix/preprocess.hpp"

namespace haptix::svm {

// One-vs-rest linear SVM. weights[c] scores class c.
struct SvmModel {
  std::array<std::vector<double>, kNumClasses> weights;
  std::array<double, kNumClasses> biases{};
  double C = 1.0;
  std::vector<std::string> channel_names;

  std::size_t dimension() const noexcept { return weights[0].size(); }
  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

/// Channel-major concatenation: out[rows * c + r] == fm(r, c).
std::vector<double> flatten(const FeatureMatrix& fm);
FeatureMatrix unflatten(std::span<const double> v, std::size_t rows, std::vector<std::string> channel_names);

struct SvmOptions {
  double C = 1.0;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;
};

struct SvmTrainResult {
  SvmModel model;
  // objective[c][e]: full-batch objective of class c's problem after epoch e.
  std::array<std::vector<double>, kNumClasses> objective;
};

/// Objective of one binary problem: mean hinge + ||w||^2 / (2 C n).
double ovr_objective(std::span<const std::vector<double>> X, std::span<const int> y_pm, std::span<const double> w,
                     double b, double C);

/// Stochastic subgradient training with step 1 / (lambda t), lambda = 1 / (C n).
/// The bias is shrunk together with w, as if it were the weight of a constant
/// feature. Throws SingleClassData when fewer than two classes are present.
SvmTrainResult train_svm(std::span<const std::vector<double>> X, std::span<const ComplianceClass> y,
                         const SvmOptions& opts = {});

struct SvmPrediction {
  ComplianceClass label;
  std::array<double, kNumClasses> scores;
};

SvmPrediction predict_svm(const SvmModel& model, std::span<const double> x);

/// argmax with ties going to the earlier class.
ComplianceClass argmax_class(const std::array<double, kNumClasses>& scores) noexcept;

nlohmann::json to_json(const SvmModel& model);
SvmModel model_from_json(const nlohmann::json& j);

}  // namespace haptix::svm

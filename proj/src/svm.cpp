#include "haptix/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace haptix::svm {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> flatten(const FeatureMatrix& fm) {
  std::vector<double> out(fm.rows * fm.cols);
  for (std::size_t c = 0; c < fm.cols; ++c) {
    for (std::size_t r = 0; r < fm.rows; ++r) out[fm.rows * c + r] = fm(r, c);
  }
  return out;
}

FeatureMatrix unflatten(std::span<const double> v, std::size_t rows, std::vector<std::string> channel_names) {
  if (rows == 0 || v.size() % rows != 0) throw DimensionMismatch("flattened length is not a multiple of rows");
  FeatureMatrix fm;
  fm.rows = rows;
  fm.cols = v.size() / rows;
  if (!channel_names.empty() && channel_names.size() != fm.cols) {
    throw DimensionMismatch("channel name count does not match flattened width");
  }
  fm.channel_names = std::move(channel_names);
  fm.values.resize(v.size());
  for (std::size_t c = 0; c < fm.cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) fm(r, c) = v[rows * c + r];
  }
  return fm;
}

double ovr_objective(std::span<const std::vector<double>> X, std::span<const int> y_pm, std::span<const double> w,
                     double b, double C) {
  const double n = static_cast<double>(X.size());
  double hinge = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    hinge += std::max(0.0, 1.0 - y_pm[i] * (dot(w, X[i]) + b));
  }
  return hinge / n + dot(w, w) / (2.0 * C * n);
}

SvmTrainResult train_svm(std::span<const std::vector<double>> X, std::span<const ComplianceClass> y,
                         const SvmOptions& opts) {
  if (X.empty()) throw EmptyTrainingSet();
  if (X.size() != y.size()) throw DimensionMismatch("train_svm: X and y lengths differ");
  if (!(opts.C > 0.0)) throw std::invalid_argument("train_svm: C must be positive");
  const std::size_t d = X.front().size();
  for (const auto& x : X) {
    if (x.size() != d) throw DimensionMismatch("train_svm: inconsistent input dimension");
  }
  std::array<bool, kNumClasses> present{};
  for (auto c : y) present[class_index(c)] = true;
  if (std::count(present.begin(), present.end(), true) < 2) throw SingleClassData();

  const std::size_t n = X.size();
  const double lambda = 1.0 / (opts.C * static_cast<double>(n));

  // The visiting order is shared by all binary problems.
  std::vector<std::vector<std::size_t>> orders(opts.epochs);
  {
    std::mt19937_64 rng(opts.seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (auto& o : orders) {
      std::shuffle(idx.begin(), idx.end(), rng);
      o = idx;
    }
  }

  SvmTrainResult res;
  res.model.C = opts.C;
  parallel_for(kNumClasses, opts.exec, [&](std::size_t c) {
    std::vector<int> ypm(n);
    for (std::size_t i = 0; i < n; ++i) ypm[i] = class_index(y[i]) == c ? 1 : -1;
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::size_t t = 0;
    auto& curve = res.objective[c];
    curve.reserve(opts.epochs);
    for (const auto& order : orders) {
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double margin = ypm[i] * (dot(w, X[i]) + b);
        const double shrink = 1.0 - eta * lambda;
        for (auto& wj : w) wj *= shrink;
        b *= shrink;
        if (margin < 1.0) {
          const double step = eta * ypm[i];
          const auto& xi = X[i];
          for (std::size_t j = 0; j < d; ++j) w[j] += step * xi[j];
          b += step;
        }
      }
      curve.push_back(ovr_objective(X, ypm, w, b, opts.C));
    }
    res.model.weights[c] = std::move(w);
    res.model.biases[c] = b;
  });
  return res;
}

ComplianceClass argmax_class(const std::array<double, kNumClasses>& scores) noexcept {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return class_at(best);
}

SvmPrediction predict_svm(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw DimensionMismatch("svm input has dimension " + std::to_string(x.size()) + ", model expects " +
                            std::to_string(model.dimension()));
  }
  SvmPrediction p{ComplianceClass::HardSkin, {}};
  for (std::size_t c = 0; c < kNumClasses; ++c) p.scores[c] = dot(model.weights[c], x) + model.biases[c];
  p.label = argmax_class(p.scores);
  return p;
}

nlohmann::json to_json(const SvmModel& m) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& wc : m.weights) w.push_back(wc);
  return {{"w", w}, {"b", m.biases}, {"C", m.C}, {"channel_names", m.channel_names}};
}

SvmModel model_from_json(const nlohmann::json& j) {
  SvmModel m;
  try {
    const auto w = j.at("w").get<std::vector<std::vector<double>>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (w.size() != kNumClasses || b.size() != kNumClasses) throw DataError("SVM JSON must hold 4 classes");
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      m.weights[c] = w[c];
      m.biases[c] = b[c];
      if (m.weights[c].size() != m.weights[0].size()) throw DimensionMismatch("SVM weight vectors differ in length");
    }
    m.C = j.at("C").get<double>();
    m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid SVM model JSON: ") + e.what());
  }
  return m;
}

}  // namespace haptix::svm

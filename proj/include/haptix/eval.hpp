#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "haptix/core.hpp"
#include "haptix/hmm.hpp"
#include "haptix/nn.hpp"
#include "haptix/preprocess.hpp"
#include "haptix/svm.hpp"

namespace haptix::eval {

// ---------------------------------------------------------------------------
// Folds

enum class FoldGrouping { None, Subject };

struct FoldSplit {
  std::size_t k = 3;
  std::uint64_t seed = 0;
  bool stratified = true;
  FoldGrouping grouping = FoldGrouping::None;
  std::vector<std::size_t> assignment;  // fold index per trial, in dataset order
  std::vector<std::string> trial_ids;

  std::size_t fold_of(std::string_view trial_id) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Seeded random folds. Stratified splits deal each class round-robin with a
/// running offset, so per-class and overall fold sizes differ by at most one.
/// Throws TooFewTrials when a class has fewer than k trials (stratified) or
/// the dataset has fewer than k trials.
FoldSplit kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed, bool stratified = true);

/// Whole subjects go to one fold (largest subjects first, to the currently
/// smallest fold). Throws TooFewTrials when there are fewer subjects than k.
FoldSplit kfold_split_by_subject(const Dataset& ds, std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Classifiers

enum class ClassifierKind { Hmm, Svm, Tcn, Lstm };

std::string_view to_string(ClassifierKind k) noexcept;
ClassifierKind parse_classifier(std::string_view name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::Tcn;
  hmm::BaumWelchOptions hmm;
  svm::SvmOptions svm;
  nn::TrainConfig nn;
  std::vector<std::size_t> tcn_widths{32, 32, 32, 32};
  std::size_t tcn_kernel = 5;
  std::size_t lstm_hidden = 50;
  std::size_t lstm_layers = 2;
  bool lstm_per_step_loss = false;

  std::string id() const { return std::string(to_string(kind)); }
  nlohmann::json to_json() const;

  /// Spec with the network training defaults of the given kind.
  static ClassifierSpec defaults(ClassifierKind kind);
};

/// Training schedule used when none is given (Adam, lr 1e-3, batch 32, 100 epochs).
nn::TrainConfig default_train_config(ClassifierKind kind);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ComplianceClass predict(const FeatureMatrix& x) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

// Fits a classifier on normalised, labelled matrices. The seed is derived per
// fold by the harness.
using Trainer = std::function<std::unique_ptr<Classifier>(std::span<const FeatureMatrix> train, std::uint64_t seed)>;

Trainer make_trainer(const ClassifierSpec& spec);

/// Rebuilds a classifier written by Classifier::to_json().
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Reports

using ConfusionCounts = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;
// Rows are true food items, columns predicted compliance classes.
using ItemConfusion = std::array<std::array<std::size_t, kNumClasses>, kFoodItems.size()>;

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  NormStats norm;
  nlohmann::json model;  // serialised classifier trained on the other folds
};

struct EvalReport {
  std::string classifier;
  std::string feature_set;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation over folds
  ConfusionCounts confusion{};  // rows true, columns predicted
  ItemConfusion item_confusion{};
  std::size_t total = 0;

  double accuracy() const noexcept;
  /// Row-normalised confusion; all-zero rows stay zero.
  std::array<std::array<double, kNumClasses>, kNumClasses> normalized_confusion() const;
  /// Sum of confusion counts with |true - predicted| == d.
  std::size_t confusions_at_distance(int d) const noexcept;
  std::size_t confusions_beyond(int d) const noexcept;
};

struct CvOptions {
  WindowConfig window;
  int workers = 0;  // 0 = all available
  Exec exec = Exec::Parallel;
};

/// For every fold: NormStats and the classifier are fitted on the remaining
/// folds only, then the held-out fold is scored. Failures are rethrown as
/// FoldFailure with the original exception nested.
EvalReport run_cv(const Dataset& ds, const Trainer& trainer, const std::string& classifier_id, const FeatureSet& fs,
                  const FoldSplit& split, const CvOptions& opts = {});
EvalReport run_cv(const Dataset& ds, const ClassifierSpec& spec, const FeatureSet& fs, const FoldSplit& split,
                  const CvOptions& opts = {});

/// Same as run_cv on matrices already prepared (unnormalised) in dataset order.
EvalReport run_cv_prepared(std::span<const FeatureMatrix> prepared, const Trainer& trainer,
                           const std::string& classifier_id, const std::string& feature_id, const FoldSplit& split,
                           const CvOptions& opts = {});

struct AblationRow {
  FeatureSet features;
  std::string feature_id;
  EvalReport report;
};

/// One run_cv per feature set on identical folds, sorted by mean accuracy
/// (descending; ties keep input order).
std::vector<AblationRow> ablate_features(const Dataset& ds, const ClassifierSpec& spec,
                                         std::span<const FeatureSet> feature_sets, const FoldSplit& split,
                                         const CvOptions& opts = {});
std::vector<AblationRow> ablate_features(const Dataset& ds, const Trainer& trainer, const std::string& classifier_id,
                                         std::span<const FeatureSet> feature_sets, const FoldSplit& split,
                                         const CvOptions& opts = {});

struct CrossDomainReport {
  std::string classifier;
  std::string feature_set;
  double accuracy = 0.0;
  ConfusionCounts confusion{};
  std::size_t total = 0;
  NormStats norm;
};

/// Train once on all of train_ds (normalisation from train_ds), test on all of test_ds.
CrossDomainReport cross_domain_eval(const Dataset& train_ds, const Dataset& test_ds, const Trainer& trainer,
                                    const std::string& classifier_id, const FeatureSet& train_fs,
                                    const FeatureSet& test_fs, const CvOptions& opts = {}, std::uint64_t seed = 0);
CrossDomainReport cross_domain_eval(const Dataset& train_ds, const Dataset& test_ds, const ClassifierSpec& spec,
                                    const FeatureSet& fs, const CvOptions& opts = {}, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Export. CSV numbers use fixed printf patterns; JSON numbers are written as
// shortest round-trip doubles. Both are byte-for-byte reproducible.

nlohmann::json report_to_json(const EvalReport& r, bool include_models = false);
std::string confusion_csv(const ConfusionCounts& counts);
std::string normalized_confusion_csv(const EvalReport& r);
std::string folds_csv(const EvalReport& r);
std::string item_confusion_csv(const EvalReport& r);
std::string ablation_csv(std::span<const AblationRow> rows);
nlohmann::json cross_domain_to_json(const CrossDomainReport& r);

}  // namespace haptix::eval

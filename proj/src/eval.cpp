#include "haptix/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>
#include <random>

#include "haptix/parallel.hpp"

namespace haptix::eval {

namespace {

std::string describe_current() {
  try {
    throw;
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

nlohmann::json norm_to_json(const NormStats& n) {
  return {{"mean", n.mean}, {"stddev", n.stddev}, {"channel_names", n.channel_names}};
}

nlohmann::json confusion_to_json(const ConfusionCounts& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : c) rows.push_back(r);
  return rows;
}

struct Prediction {
  ComplianceClass truth;
  ComplianceClass predicted;
  std::size_t item_truth;
};

Exec fold_exec(const CvOptions& opts) {
  if (opts.exec == Exec::Serial || opts.workers == 1) return Exec::Serial;
  return Exec::Parallel;
}

}  // namespace

// ---------------------------------------------------------------------------
// Folds

std::size_t FoldSplit::fold_of(std::string_view trial_id) const {
  for (std::size_t i = 0; i < trial_ids.size(); ++i)
    if (trial_ids[i] == trial_id) return assignment[i];
  throw std::out_of_range("trial '" + std::string(trial_id) + "' is not part of the split");
}

std::vector<std::size_t> FoldSplit::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : assignment) ++sizes[f];
  return sizes;
}

FoldSplit kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed, bool stratified) {
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  const std::size_t n = ds.size();
  if (n < k) throw TooFewTrials("dataset has " + std::to_string(n) + " trials, fewer than k = " + std::to_string(k));

  FoldSplit split;
  split.k = k;
  split.seed = seed;
  split.stratified = stratified;
  split.assignment.assign(n, 0);
  split.trial_ids.reserve(n);
  for (const auto& t : ds.trials) split.trial_ids.push_back(t.id);

  std::mt19937_64 rng(seed);
  if (!stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j = 0; j < n; ++j) split.assignment[order[j]] = j % k;
    return split;
  }

  std::size_t offset = 0;
  for (auto c : kAllClasses) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (ds.trials[i].label == c) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < k)
      throw TooFewTrials("class " + std::string(to_string(c)) + " has " + std::to_string(members.size()) +
                         " trials, fewer than k = " + std::to_string(k));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) split.assignment[members[j]] = (offset + j) % k;
    offset = (offset + members.size()) % k;
  }
  return split;
}

FoldSplit kfold_split_by_subject(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < ds.size(); ++i) by_subject[ds.trials[i].subject].push_back(i);
  if (by_subject.size() < k)
    throw TooFewTrials("only " + std::to_string(by_subject.size()) + " subjects for k = " + std::to_string(k));

  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [_, members] : by_subject) groups.push_back(&members);
  std::mt19937_64 rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);
  std::stable_sort(groups.begin(), groups.end(), [](auto* a, auto* b) { return a->size() > b->size(); });

  FoldSplit split;
  split.k = k;
  split.seed = seed;
  split.stratified = false;
  split.grouping = FoldGrouping::Subject;
  split.assignment.assign(ds.size(), 0);
  for (const auto& t : ds.trials) split.trial_ids.push_back(t.id);
  std::vector<std::size_t> sizes(k, 0);
  for (const auto* members : groups) {
    const auto f = static_cast<std::size_t>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (auto i : *members) split.assignment[i] = f;
    sizes[f] += members->size();
  }
  return split;
}

// ---------------------------------------------------------------------------
// Reports

double EvalReport::accuracy() const noexcept {
  if (total == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) correct += confusion[c][c];
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::array<std::array<double, kNumClasses>, kNumClasses> EvalReport::normalized_confusion() const {
  std::array<std::array<double, kNumClasses>, kNumClasses> out{};
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    const auto sum = std::accumulate(confusion[r].begin(), confusion[r].end(), std::size_t{0});
    if (sum == 0) continue;
    for (std::size_t c = 0; c < kNumClasses; ++c)
      out[r][c] = static_cast<double>(confusion[r][c]) / static_cast<double>(sum);
  }
  return out;
}

std::size_t EvalReport::confusions_at_distance(int d) const noexcept {
  std::size_t n = 0;
  for (std::size_t r = 0; r < kNumClasses; ++r)
    for (std::size_t c = 0; c < kNumClasses; ++c)
      if (std::abs(static_cast<int>(r) - static_cast<int>(c)) == d) n += confusion[r][c];
  return n;
}

std::size_t EvalReport::confusions_beyond(int d) const noexcept {
  std::size_t n = 0;
  for (std::size_t r = 0; r < kNumClasses; ++r)
    for (std::size_t c = 0; c < kNumClasses; ++c)
      if (std::abs(static_cast<int>(r) - static_cast<int>(c)) > d) n += confusion[r][c];
  return n;
}

// ---------------------------------------------------------------------------
// Cross-validation

EvalReport run_cv_prepared(std::span<const FeatureMatrix> prepared, const Trainer& trainer,
                           const std::string& classifier_id, const std::string& feature_id, const FoldSplit& split,
                           const CvOptions& opts) {
  if (prepared.size() != split.assignment.size())
    throw DimensionMismatch("split covers " + std::to_string(split.assignment.size()) + " trials, got " +
                            std::to_string(prepared.size()) + " matrices");
  const std::size_t k = split.k;
  std::vector<FoldResult> folds(k);
  std::vector<std::vector<Prediction>> predictions(k);

  parallel_for(
      k, fold_exec(opts),
      [&](std::size_t fold) {
        try {
          std::vector<FeatureMatrix> train;
          std::vector<const FeatureMatrix*> test;
          for (std::size_t i = 0; i < prepared.size(); ++i) {
            if (split.assignment[i] == fold)
              test.push_back(&prepared[i]);
            else
              train.push_back(prepared[i]);
          }
          if (train.empty() || test.empty()) throw TooFewTrials("fold has an empty train or test side");
          auto norm = fit_norm(train);
          for (auto& fm : train) norm.apply(fm);
          auto clf = trainer(train, split.seed * 1000003ULL + fold);

          auto& out = predictions[fold];
          std::size_t correct = 0;
          for (const auto* fm : test) {
            if (!fm->label) throw DataError("test matrix '" + fm->trial_id + "' has no label");
            const auto pred = clf->predict(norm.applied(*fm));
            out.push_back({*fm->label, pred, food_item_index(fm->food_item)});
            if (pred == *fm->label) ++correct;
          }
          auto& fr = folds[fold];
          fr.fold = fold;
          fr.n_test = test.size();
          fr.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
          fr.norm = std::move(norm);
          fr.model = clf->to_json();
        } catch (...) {
          std::throw_with_nested(FoldFailure(fold, describe_current()));
        }
      },
      opts.workers);

  EvalReport r;
  r.classifier = classifier_id;
  r.feature_set = feature_id;
  for (const auto& preds : predictions) {
    for (const auto& p : preds) {
      ++r.confusion[class_index(p.truth)][class_index(p.predicted)];
      ++r.item_confusion[p.item_truth][class_index(p.predicted)];
      ++r.total;
    }
  }
  double sum = 0.0;
  for (const auto& f : folds) sum += f.accuracy;
  r.mean_accuracy = sum / static_cast<double>(k);
  double ss = 0.0;
  for (const auto& f : folds) ss += (f.accuracy - r.mean_accuracy) * (f.accuracy - r.mean_accuracy);
  r.std_accuracy = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1)) : 0.0;
  r.folds = std::move(folds);
  return r;
}

EvalReport run_cv(const Dataset& ds, const Trainer& trainer, const std::string& classifier_id, const FeatureSet& fs,
                  const FoldSplit& split, const CvOptions& opts) {
  fs.validate();
  const auto prepared = prepare_dataset(ds, fs, opts.window, opts.exec);
  return run_cv_prepared(prepared, trainer, classifier_id, fs.id(), split, opts);
}

EvalReport run_cv(const Dataset& ds, const ClassifierSpec& spec, const FeatureSet& fs, const FoldSplit& split,
                  const CvOptions& opts) {
  return run_cv(ds, make_trainer(spec), spec.id(), fs, split, opts);
}

std::vector<AblationRow> ablate_features(const Dataset& ds, const Trainer& trainer, const std::string& classifier_id,
                                         std::span<const FeatureSet> feature_sets, const FoldSplit& split,
                                         const CvOptions& opts) {
  if (feature_sets.empty()) throw std::invalid_argument("ablation needs at least one feature set");
  std::vector<AblationRow> rows;
  rows.reserve(feature_sets.size());
  for (const auto& fs : feature_sets) {
    AblationRow row;
    row.features = fs;
    row.feature_id = fs.id();
    row.report = run_cv(ds, trainer, classifier_id, fs, split, opts);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
    return a.report.mean_accuracy > b.report.mean_accuracy;
  });
  return rows;
}

std::vector<AblationRow> ablate_features(const Dataset& ds, const ClassifierSpec& spec,
                                         std::span<const FeatureSet> feature_sets, const FoldSplit& split,
                                         const CvOptions& opts) {
  return ablate_features(ds, make_trainer(spec), spec.id(), feature_sets, split, opts);
}

CrossDomainReport cross_domain_eval(const Dataset& train_ds, const Dataset& test_ds, const Trainer& trainer,
                                    const std::string& classifier_id, const FeatureSet& train_fs,
                                    const FeatureSet& test_fs, const CvOptions& opts, std::uint64_t seed) {
  train_fs.validate();
  test_fs.validate();
  auto train = prepare_dataset(train_ds, train_fs, opts.window, opts.exec);
  const auto test = prepare_dataset(test_ds, test_fs, opts.window, opts.exec);
  if (train.empty()) throw EmptyTrainingSet();
  if (test.empty()) throw EmptyDataset();
  if (train.front().channel_names != test.front().channel_names)
    throw DimensionMismatch("train feature set '" + train_fs.id() + "' and test feature set '" + test_fs.id() +
                            "' select different channels");

  CrossDomainReport r;
  r.classifier = classifier_id;
  r.feature_set = train_fs.id();
  r.norm = fit_norm(train);
  for (auto& fm : train) r.norm.apply(fm);
  const auto clf = trainer(train, seed);

  std::vector<ComplianceClass> preds(test.size());
  parallel_for(
      test.size(), fold_exec(opts), [&](std::size_t i) { preds[i] = clf->predict(r.norm.applied(test[i])); },
      opts.workers);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].label) throw DataError("test matrix '" + test[i].trial_id + "' has no label");
    ++r.confusion[class_index(*test[i].label)][class_index(preds[i])];
    if (preds[i] == *test[i].label) ++correct;
  }
  r.total = test.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  return r;
}

CrossDomainReport cross_domain_eval(const Dataset& train_ds, const Dataset& test_ds, const ClassifierSpec& spec,
                                    const FeatureSet& fs, const CvOptions& opts, std::uint64_t seed) {
  return cross_domain_eval(train_ds, test_ds, make_trainer(spec), spec.id(), fs, fs, opts, seed);
}

// ---------------------------------------------------------------------------
// Export

nlohmann::json report_to_json(const EvalReport& r, bool include_models) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    nlohmann::json jf{{"fold", f.fold}, {"n_test", f.n_test}, {"accuracy", f.accuracy}};
    if (include_models) {
      jf["norm"] = norm_to_json(f.norm);
      jf["model"] = f.model;
    }
    folds.push_back(std::move(jf));
  }
  nlohmann::json classes = nlohmann::json::array();
  for (auto c : kAllClasses) classes.push_back(std::string(to_string(c)));
  nlohmann::json normalized = nlohmann::json::array();
  for (const auto& row : r.normalized_confusion()) {
    nlohmann::json jr = nlohmann::json::array();
    for (double v : row) jr.push_back(v);
    normalized.push_back(std::move(jr));
  }
  return {{"classifier", r.classifier},
          {"feature_set", r.feature_set},
          {"mean_accuracy", r.mean_accuracy},
          {"std_accuracy", r.std_accuracy},
          {"pooled_accuracy", r.accuracy()},
          {"total", r.total},
          {"classes", classes},
          {"confusion", confusion_to_json(r.confusion)},
          {"normalized_confusion", normalized},
          {"folds", folds}};
}

std::string confusion_csv(const ConfusionCounts& counts) {
  std::string out = "true\\predicted";
  for (auto c : kAllClasses) out += "," + std::string(to_string(c));
  out += "\n";
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    out += std::string(to_string(class_at(r)));
    for (auto v : counts[r]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

std::string normalized_confusion_csv(const EvalReport& r) {
  const auto norm = r.normalized_confusion();
  std::string out = "true\\predicted";
  for (auto c : kAllClasses) out += "," + std::string(to_string(c));
  out += "\n";
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out += std::string(to_string(class_at(i)));
    for (double v : norm[i]) out += "," + fmt("%.6f", v);
    out += "\n";
  }
  return out;
}

std::string folds_csv(const EvalReport& r) {
  std::string out = "fold,n_test,accuracy\n";
  for (const auto& f : r.folds)
    out += std::to_string(f.fold) + "," + std::to_string(f.n_test) + "," + fmt("%.6f", f.accuracy) + "\n";
  return out;
}

std::string item_confusion_csv(const EvalReport& r) {
  std::string out = "item\\predicted";
  for (auto c : kAllClasses) out += "," + std::string(to_string(c));
  out += "\n";
  for (std::size_t i = 0; i < kFoodItems.size(); ++i) {
    out += std::string(kFoodItems[i].name);
    for (auto v : r.item_confusion[i]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::string out = "rank,feature_set,mean_accuracy,std_accuracy\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out += std::to_string(i + 1) + "," + rows[i].feature_id + "," + fmt("%.6f", rows[i].report.mean_accuracy) + "," +
           fmt("%.6f", rows[i].report.std_accuracy) + "\n";
  return out;
}

nlohmann::json cross_domain_to_json(const CrossDomainReport& r) {
  return {{"classifier", r.classifier},
          {"feature_set", r.feature_set},
          {"accuracy", r.accuracy},
          {"total", r.total},
          {"confusion", confusion_to_json(r.confusion)}};
}

}  // namespace haptix::eval

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "haptix/eval.hpp"
#include "haptix/synthgen.hpp"
#include "test_support.hpp"

using namespace haptix;
using namespace haptix::eval;

namespace {

Dataset labels_only(std::size_t per_class, std::size_t subjects = 4) {
  std::vector<Trial> trials;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      auto t = test::blank_trial("c" + std::to_string(c) + "-" + std::to_string(i),
                                 std::string(kFoodItems[3 * c + i % 3].name), 2);
      t.subject = "S" + std::to_string(i % subjects);
      trials.push_back(std::move(t));
    }
  }
  return Dataset::from_trials(std::move(trials));
}

Dataset small_synthetic(std::size_t per_class, std::uint64_t seed = 0) {
  synth::GenConfig cfg;
  cfg.trials_per_class = per_class;
  cfg.seed = seed;
  return synth::generate(cfg);
}

template <class F>
class Stub : public Classifier {
 public:
  explicit Stub(F f) : f_(std::move(f)) {}
  ComplianceClass predict(const FeatureMatrix& x) const override { return f_(x); }
  nlohmann::json to_json() const override { return {{"kind", "stub"}}; }

 private:
  F f_;
};

template <class F>
Trainer stub_trainer(F f) {
  return [f](std::span<const FeatureMatrix>, std::uint64_t) { return std::make_unique<Stub<F>>(f); };
}

Trainer memorising_trainer() {
  return [](std::span<const FeatureMatrix> train, std::uint64_t) {
    std::map<std::string, ComplianceClass> seen;
    for (const auto& fm : train) seen[fm.trial_id] = *fm.label;
    auto f = [seen](const FeatureMatrix& x) {
      const auto it = seen.find(x.trial_id);
      return it == seen.end() ? ComplianceClass::HardSkin : it->second;
    };
    return std::unique_ptr<Classifier>(std::make_unique<Stub<decltype(f)>>(f));
  };
}

const FeatureSet kForcePosition = FeatureSet::from_groups(true, false, true, false, false);

ClassifierSpec quick_svm() {
  auto spec = ClassifierSpec::defaults(ClassifierKind::Svm);
  spec.svm.epochs = 20;
  return spec;
}

}  // namespace

TEST_CASE("stratified folds") {
  const auto ds = labels_only(3);
  const auto split = kfold_split(ds, 3, 7);
  REQUIRE(split.assignment.size() == 12);
  std::map<std::pair<std::size_t, ComplianceClass>, int> count;
  for (std::size_t i = 0; i < 12; ++i) ++count[{split.assignment[i], ds.trials[i].label}];
  for (std::size_t f = 0; f < 3; ++f)
    for (auto c : kAllClasses) CHECK(count[{f, c}] == 1);

  CHECK(kfold_split(ds, 3, 7).assignment == split.assignment);
  CHECK(split.fold_of(ds.trials[4].id) == split.assignment[4]);

  const auto big = labels_only(708);
  CHECK(big.size() == 2832);
  CHECK(kfold_split(big, 3, 1).fold_sizes() == std::vector<std::size_t>{944, 944, 944});

  // Uneven classes: per-class counts differ by at most one across folds.
  std::vector<Trial> uneven = labels_only(7).trials;
  uneven.resize(uneven.size() - 2);
  const auto ud = Dataset::from_trials(uneven);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = kfold_split(ud, 3, seed);
    std::map<ComplianceClass, std::array<int, 3>> per;
    for (std::size_t i = 0; i < ud.size(); ++i) ++per[ud.trials[i].label][s.assignment[i]];
    for (const auto& [c, folds] : per) CHECK(*std::max_element(folds.begin(), folds.end()) -
                                                 *std::min_element(folds.begin(), folds.end()) <=
                                             1);
    const auto sizes = s.fold_sizes();
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  }

  CHECK_THROWS_AS(kfold_split(labels_only(2), 3, 0), TooFewTrials);
  CHECK_THROWS_AS(kfold_split(ds, 1, 0), std::invalid_argument);
  const auto plain = kfold_split(labels_only(2), 3, 0, false);
  CHECK(plain.fold_sizes() == std::vector<std::size_t>{3, 3, 2});
}

TEST_CASE("subject-grouped folds keep subjects together") {
  const auto ds = labels_only(12, 6);
  const auto split = kfold_split_by_subject(ds, 3, 2);
  std::map<std::string, std::set<std::size_t>> folds_of;
  for (std::size_t i = 0; i < ds.size(); ++i) folds_of[ds.trials[i].subject].insert(split.assignment[i]);
  for (const auto& [subject, folds] : folds_of) CHECK(folds.size() == 1);
  CHECK(split.fold_sizes() == std::vector<std::size_t>{16, 16, 16});
  CHECK_THROWS_AS(kfold_split_by_subject(labels_only(3, 2), 3, 0), TooFewTrials);
}

TEST_CASE("oracle stubs") {
  const auto ds = small_synthetic(6);
  const auto split = kfold_split(ds, 3, 0);
  const auto perfect =
      run_cv(ds, stub_trainer([](const FeatureMatrix& x) { return *x.label; }), "perfect", kForcePosition, split);
  CHECK(perfect.accuracy() == 1.0);
  CHECK(perfect.mean_accuracy == 1.0);
  CHECK(perfect.std_accuracy == 0.0);
  for (std::size_t i = 0; i < kNumClasses; ++i)
    for (std::size_t j = 0; j < kNumClasses; ++j) CHECK(perfect.confusion[i][j] == (i == j ? 6u : 0u));
  CHECK(perfect.classifier == "perfect");
  CHECK(perfect.feature_set == kForcePosition.id());
}

TEST_CASE("random predictions score near chance") {
  const auto ds = small_synthetic(250);
  const auto random = stub_trainer([](const FeatureMatrix& x) {
    std::mt19937_64 rng(std::hash<std::string>{}(x.trial_id));
    return class_at(std::uniform_int_distribution<std::size_t>(0, 3)(rng));
  });
  const auto r = run_cv(ds, random, "random", FeatureSet::parse("fz"), kfold_split(ds, 3, 0));
  CHECK(r.total == 1000);
  CHECK(std::abs(r.accuracy() - 0.25) <= 0.05);
}

TEST_CASE("report invariants") {
  const auto ds = small_synthetic(9, 3);
  const auto split = kfold_split(ds, 3, 1);
  const auto r = run_cv(ds, quick_svm(), kForcePosition, split);
  std::size_t total = 0, trace = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j) row += r.confusion[i][j];
    CHECK(row == ds.class_counts[i]);
    total += row;
    trace += r.confusion[i][i];
    double norm = 0.0;
    for (double v : r.normalized_confusion()[i]) norm += v;
    CHECK(std::abs(norm - 1.0) <= 1e-9);
  }
  CHECK(total == r.total);
  CHECK(r.accuracy() == static_cast<double>(trace) / static_cast<double>(total));
  CHECK(r.confusions_at_distance(0) == trace);
  CHECK(r.confusions_at_distance(1) + r.confusions_beyond(1) + trace == total);

  std::size_t item_total = 0;
  for (std::size_t it = 0; it < kFoodItems.size(); ++it) {
    std::size_t row = 0;
    for (auto v : r.item_confusion[it]) row += v;
    CHECK(row == 3);
    item_total += row;
  }
  CHECK(item_total == total);

  double mean = 0.0;
  for (const auto& f : r.folds) mean += f.accuracy / 3.0;
  CHECK(r.mean_accuracy == doctest::Approx(mean).epsilon(1e-12));

  EvalReport empty_row;
  empty_row.confusion[0] = {2, 1, 0, 0};
  CHECK(empty_row.normalized_confusion()[1] == std::array<double, kNumClasses>{0, 0, 0, 0});
}

TEST_CASE("reports are deterministic and serial equals parallel") {
  const auto ds = small_synthetic(6, 4);
  const auto split = kfold_split(ds, 3, 2);
  CvOptions serial;
  serial.exec = Exec::Serial;
  const auto a = report_to_json(run_cv(ds, quick_svm(), kForcePosition, split), true).dump();
  const auto b = report_to_json(run_cv(ds, quick_svm(), kForcePosition, split, serial), true).dump();
  CHECK(a == b);
}

TEST_CASE("held-out folds never reach training") {
  const auto ds = small_synthetic(6, 5);
  const auto split = kfold_split(ds, 3, 3);
  auto poisoned = ds;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (split.assignment[i] != 0) continue;
    for (auto& w : poisoned.trials[i].wrench) w.fy = 1e6;
    for (auto& p : poisoned.trials[i].pose) p.pz -= 50.0;
  }
  for (auto kind : {ClassifierKind::Svm, ClassifierKind::Hmm}) {
    auto spec = ClassifierSpec::defaults(kind);
    spec.svm.epochs = 10;
    spec.hmm.max_iter = 5;
    const auto clean = run_cv(ds, spec, FeatureSet::all(false), split);
    const auto dirty = run_cv(poisoned, spec, FeatureSet::all(false), split);
    CHECK(clean.folds[0].norm.mean == dirty.folds[0].norm.mean);
    CHECK(clean.folds[0].norm.stddev == dirty.folds[0].norm.stddev);
    CHECK(clean.folds[0].model == dirty.folds[0].model);
    CHECK(clean.folds[1].model != dirty.folds[1].model);
  }
}

TEST_CASE("fold failures carry the fold and the cause") {
  const auto ds = small_synthetic(3);
  const auto split = kfold_split(ds, 3, 0);
  Trainer failing = [](std::span<const FeatureMatrix> train, std::uint64_t seed) -> std::unique_ptr<Classifier> {
    if (seed % 1000003 == 1) throw NonFiniteLoss("diverged");
    return stub_trainer([](const FeatureMatrix&) { return ComplianceClass::Soft; })(train, seed);
  };
  for (auto exec : {Exec::Serial, Exec::Parallel}) {
    CvOptions opts;
    opts.exec = exec;
    bool caught = false;
    try {
      run_cv(ds, failing, "failing", kForcePosition, split, opts);
    } catch (const FoldFailure& e) {
      caught = true;
      CHECK(e.fold() == 1);
      CHECK_THROWS_AS(std::rethrow_if_nested(e), NonFiniteLoss);
    }
    CHECK(caught);
  }
}

TEST_CASE("feature ablation") {
  const auto ds = small_synthetic(6, 6);
  const auto split = kfold_split(ds, 3, 4);
  const std::vector<FeatureSet> one{kForcePosition};
  const auto rows = ablate_features(ds, quick_svm(), one, split);
  REQUIRE(rows.size() == 1);
  const auto direct = run_cv(ds, quick_svm(), kForcePosition, split);
  CHECK(report_to_json(rows[0].report).dump() == report_to_json(direct).dump());
  CHECK(rows[0].feature_id == kForcePosition.id());

  const std::vector<FeatureSet> sets{FeatureSet::parse("rx"), FeatureSet::parse("fz"), kForcePosition};
  const auto table = ablate_features(ds, quick_svm(), sets, split);
  REQUIRE(table.size() == 3);
  for (std::size_t i = 1; i < table.size(); ++i)
    CHECK(table[i - 1].report.mean_accuracy >= table[i].report.mean_accuracy);

  const std::vector<FeatureSet> empty{FeatureSet{}};
  CHECK_THROWS_AS(ablate_features(ds, quick_svm(), empty, split), std::invalid_argument);
  CHECK_THROWS_AS(ablate_features(ds, quick_svm(), std::vector<FeatureSet>{}, split), std::invalid_argument);
}

TEST_CASE("cross-domain evaluation") {
  const auto ds = small_synthetic(4, 7);
  const auto same = cross_domain_eval(ds, ds, memorising_trainer(), "memo", kForcePosition, kForcePosition);
  CHECK(same.accuracy == 1.0);
  CHECK(same.total == ds.size());
  CHECK_THROWS_AS(cross_domain_eval(ds, ds, memorising_trainer(), "memo", FeatureSet::parse("force"),
                                    FeatureSet::parse("position")),
                  DimensionMismatch);

  synth::GenConfig robot;
  robot.trials_per_class = 4;
  robot.domain_shift = 1.6;
  robot.source = Source::Robot;
  const auto shifted = cross_domain_eval(ds, synth::generate(robot), quick_svm(), kForcePosition);
  CHECK(shifted.total == 16);
  CHECK(shifted.norm.channel_names == kForcePosition.channel_names());
}

TEST_CASE("exporters") {
  const auto ds = small_synthetic(3, 8);
  const auto r = run_cv(ds, stub_trainer([](const FeatureMatrix& x) { return *x.label; }), "perfect",
                        FeatureSet::parse("fz"), kfold_split(ds, 3, 0));
  CHECK(confusion_csv(r.confusion) ==
        "true\\predicted,hard-skin,hard,medium,soft\n"
        "hard-skin,3,0,0,0\nhard,0,3,0,0\nmedium,0,0,3,0\nsoft,0,0,0,3\n");
  CHECK(folds_csv(r) == "fold,n_test,accuracy\n0,4,1.000000\n1,4,1.000000\n2,4,1.000000\n");
  const auto norm = normalized_confusion_csv(r);
  CHECK(norm.find("hard-skin,1.000000,0.000000,0.000000,0.000000\n") != std::string::npos);
  const auto items = item_confusion_csv(r);
  CHECK(std::count(items.begin(), items.end(), '\n') == 13);
  const auto j = report_to_json(r);
  CHECK(j.at("classifier") == "perfect");
  CHECK(j.at("feature_set") == "fz");
  CHECK(j.at("mean_accuracy").get<double>() == 1.0);
}

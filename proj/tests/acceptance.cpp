// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number ("acceptance 3 9").
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "haptix/cli.hpp"
#include "haptix/eval.hpp"
#include "haptix/hmm.hpp"
#include "haptix/nn.hpp"
#include "haptix/preprocess.hpp"
#include "haptix/stats.hpp"
#include "haptix/synthgen.hpp"
#include "test_support.hpp"

using namespace haptix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Shared end-to-end results (criteria 5 and 8 use the same TCN run).

synth::GenConfig benchmark_config() {
  synth::GenConfig cfg;
  cfg.trials_per_class = 60;
  cfg.noise_std = 0.05;
  cfg.seed = 0;
  return cfg;
}

const Dataset& benchmark_data() {
  static const Dataset ds = synth::generate(benchmark_config());
  return ds;
}

FeatureSet features_for(eval::ClassifierKind kind) {
  using K = eval::ClassifierKind;
  return kind == K::Tcn || kind == K::Lstm ? FeatureSet::all() : FeatureSet::from_groups(true, false, true, false, false);
}

std::map<eval::ClassifierKind, eval::EvalReport>& benchmark_cache() {
  static std::map<eval::ClassifierKind, eval::EvalReport> cache;
  return cache;
}

const eval::EvalReport& benchmark_report(eval::ClassifierKind kind) {
  auto& cache = benchmark_cache();
  if (auto it = cache.find(kind); it != cache.end()) return it->second;
  const auto& ds = benchmark_data();
  const auto split = eval::kfold_split(ds, 3, 0);
  return cache.emplace(kind, eval::run_cv(ds, eval::ClassifierSpec::defaults(kind), features_for(kind), split))
      .first->second;
}

// ---------------------------------------------------------------------------

Outcome forward_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> K(1, 3), T(1, 6), F(1, 3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto k = K(rng), t = T(rng), f = F(rng);
    const auto m = test::random_model(rng, k, f);
    const auto obs = test::random_matrix(rng, t, f);
    const double expected = test::brute_force_loglik(m, obs);
    worst = std::max(worst, std::abs(hmm::forward_loglik(m, obs) - expected) / std::abs(expected));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 10.0, fmt("max rel error %.2e over 100 models (< 1e-9), %.2f s (< 10 s)", worst, secs)};
}

Outcome baum_welch_checks() {
  synth::GenConfig cfg;
  cfg.trials_per_class = 10;
  cfg.noise_std = 0.2;
  cfg.seed = 5;
  auto data = prepare_dataset(synth::generate(cfg), FeatureSet::from_groups(true, false, true, false, false));
  const auto norm = fit_norm(data);
  for (auto& fm : data) norm.apply(fm);

  double worst_drop = 0.0, worst_recomputed_drop = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    hmm::BaumWelchOptions opts;
    opts.init_seed = seed;
    opts.max_iter = 30;
    opts.tol = 0.0;
    std::vector<double> recomputed;
    opts.on_iteration = [&](std::size_t, const hmm::HmmModel& m) {
      double total = 0.0;
      for (const auto& fm : data) total += hmm::forward_loglik(m, fm);
      recomputed.push_back(total);
    };
    const auto res = hmm::baum_welch(data, opts);
    for (std::size_t i = 1; i < res.loglik_history.size(); ++i)
      worst_drop = std::max(worst_drop, res.loglik_history[i - 1] - res.loglik_history[i]);
    for (std::size_t i = 1; i < recomputed.size(); ++i)
      worst_recomputed_drop = std::max(worst_recomputed_drop, recomputed[i - 1] - recomputed[i]);
  }

  hmm::BaumWelchOptions one;
  one.states = 1;
  const auto m = hmm::baum_welch(data, one).model;
  double moment_err = 0.0;
  for (std::size_t f = 0; f < m.features; ++f) {
    double s = 0.0, n = 0.0;
    for (const auto& d : data)
      for (std::size_t r = 0; r < d.rows; ++r) {
        s += d(r, f);
        ++n;
      }
    const double mean = s / n;
    double ss = 0.0;
    for (const auto& d : data)
      for (std::size_t r = 0; r < d.rows; ++r) ss += (d(r, f) - mean) * (d(r, f) - mean);
    moment_err = std::max({moment_err, std::abs(m.means[f] - mean), std::abs(m.variances[f] - ss / n)});
  }
  const bool ok = worst_drop <= 1e-8 && worst_recomputed_drop <= 1e-8 && moment_err <= 1e-10;
  return {ok, fmt("largest per-iteration drop %.2e (recomputed %.2e, <= 1e-8) over 20 inits; K=1 moment error %.2e "
                  "(<= 1e-10)",
                  std::max(worst_drop, 0.0), std::max(worst_recomputed_drop, 0.0), moment_err)};
}

Outcome gradient_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  double tcn_worst = 0.0, lstm_worst = 0.0;
  std::size_t tcn_ok = 0, lstm_ok = 0;
  std::vector<std::string> failures;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const auto x = test::random_matrix(rng, 64, 6);
    const std::size_t label = seed % kNumClasses;
    nn::TcnShape ts;
    ts.input_channels = 6;
    nn::LstmShape ls;
    ls.input_channels = 6;
    const double e_tcn = nn::grad_check(nn::TcnModel::random(ts, seed), x, label, 1e-5, 200, seed).max_rel_error;
    const double e_lstm = nn::grad_check(nn::LstmModel::random(ls, seed), x, label, 1e-5, 200, seed).max_rel_error;
    tcn_worst = std::max(tcn_worst, e_tcn);
    lstm_worst = std::max(lstm_worst, e_lstm);
    tcn_ok += e_tcn < 1e-4;
    lstm_ok += e_lstm < 1e-4;
    if (e_tcn >= 1e-4) failures.push_back(fmt("tcn seed %d: %.2e", static_cast<int>(seed), e_tcn));
    if (e_lstm >= 1e-4) failures.push_back(fmt("lstm seed %d: %.2e", static_cast<int>(seed), e_lstm));
  }
  const double secs = seconds_since(t0);
  std::string detail = fmt("TCN %zu/10 (worst %.2e), LSTM %zu/10 (worst %.2e), eps 1e-5, bound 1e-4, %.1f s (< 120 s)",
                           tcn_ok, tcn_worst, lstm_ok, lstm_worst, secs);
  for (const auto& f : failures) detail += "; " + f;
  return {tcn_ok == 10 && lstm_ok == 10 && secs < 120.0, detail};
}

Outcome preprocessing_exactness() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> gap(0.001, 0.05);
  double affine_err = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> t{gap(rng)}, v;
    for (int i = 0; i < 40; ++i) t.push_back(t.back() + gap(rng));
    const double a = 10.0 * (gap(rng) - 0.025), b = 5.0 * gap(rng);
    for (double x : t) v.push_back(a * x + b);
    const auto out = resample_linear(t, v, kDefaultGrid);
    const double step = (t.back() - t.front()) / static_cast<double>(kDefaultGrid - 1);
    for (std::size_t i = 0; i < kDefaultGrid; ++i) {
      const double tg = i + 1 == kDefaultGrid ? t.back() : t.front() + static_cast<double>(i) * step;
      affine_err = std::max(affine_err, std::abs(out[i] - (a * tg + b)));
    }
  }

  bool identity = true;
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 50; ++rep) {
    const double first = gap(rng), span = 0.5 + gap(rng);
    std::vector<double> t(kDefaultGrid), v(kDefaultGrid);
    for (std::size_t i = 0; i < kDefaultGrid; ++i) {
      t[i] = first + static_cast<double>(i) * (span / static_cast<double>(kDefaultGrid - 1));
      v[i] = normal(rng);
    }
    identity = identity && resample_linear(t, v, kDefaultGrid) == v;
  }

  synth::GenConfig cfg;
  cfg.trials_per_class = 20;
  cfg.noise_std = 0.3;
  auto prepared = prepare_dataset(synth::generate(cfg), FeatureSet::all());
  const auto norm = fit_norm(prepared);
  for (auto& fm : prepared) norm.apply(fm);
  double moment_err = 0.0;
  for (std::size_t c = 0; c < prepared.front().cols; ++c) {
    double s = 0.0, n = 0.0, ss = 0.0;
    for (const auto& fm : prepared)
      for (std::size_t r = 0; r < fm.rows; ++r) {
        s += fm(r, c);
        ++n;
      }
    const double mean = s / n;
    for (const auto& fm : prepared)
      for (std::size_t r = 0; r < fm.rows; ++r) ss += (fm(r, c) - mean) * (fm(r, c) - mean);
    moment_err = std::max({moment_err, std::abs(mean), std::abs(std::sqrt(ss / n) - 1.0)});
  }

  std::uniform_real_distribution<double> rate(50.0, 250.0), noise(0.0, 0.5), start(0.0, 1.2);
  std::size_t trials = 0, violations = 0;
  double worst_excess = -INFINITY;
  for (std::uint64_t batch = 0; batch < 10; ++batch) {
    synth::GenConfig g;
    g.trials_per_class = 25;
    g.seed = 100 + batch;
    g.sample_rate = rate(rng);
    g.noise_std = noise(rng);
    const double period = 1.0 / g.sample_rate;
    for (const auto& trial : synth::generate(g).trials) {
      ++trials;
      const auto aligned = align_streams(trial);
      for (double t0 : {detect_contact(aligned), start(rng)}) {
        const auto w = extract_window(aligned, t0, 0.82);
        for (double len : {w.trial.wrench.back().t - w.trial.wrench.front().t,
                           w.trial.pose.back().t - w.trial.pose.front().t}) {
          worst_excess = std::max(worst_excess, len - (0.82 + period));
          violations += len > 0.82 + period;
        }
      }
    }
  }

  const bool ok = affine_err <= 1e-12 && identity && moment_err <= 1e-10 && violations == 0 && trials == 1000;
  return {ok, fmt("affine error %.2e (<= 1e-12); gridded input %s; moment error %.2e (<= 1e-10); "
                  "%zu window overruns over %zu trials (max length - limit %.2e s)",
                  affine_err, identity ? "reproduced exactly" : "NOT reproduced", moment_err, violations, trials,
                  worst_excess)};
}

Outcome end_to_end() {
  using K = eval::ClassifierKind;
  const auto t0 = std::chrono::steady_clock::now();
  benchmark_data();
  bool ok = true;
  std::string detail;
  for (auto kind : {K::Tcn, K::Svm, K::Hmm, K::Lstm}) {
    const auto c0 = std::chrono::steady_clock::now();
    const auto& r = benchmark_report(kind);
    const double bar = kind == K::Lstm ? 0.80 : 0.90;
    ok = ok && r.mean_accuracy >= bar;
    detail += fmt("%s/%s %.4f (>= %.2f, %.0f s); ", std::string(eval::to_string(kind)).c_str(),
                  r.feature_set.c_str(), r.mean_accuracy, bar, seconds_since(c0));
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 600.0;
  return {ok, detail + fmt("total %.0f s (< 600 s)", secs)};
}

Outcome ablation() {
  synth::GenConfig cfg;
  cfg.trials_per_class = 60;
  cfg.noise_std = 0.05;
  cfg.fz_only_signal = true;
  const auto ds = synth::generate(cfg);
  FeatureSet no_fz = FeatureSet::all(false);
  no_fz.channels[static_cast<std::size_t>(Channel::Fz)] = false;
  const std::vector<FeatureSet> sets{FeatureSet::parse("fz"), FeatureSet::parse("force"),
                                     FeatureSet::parse("position"), FeatureSet::all(false), no_fz};
  const auto rows = eval::ablate_features(ds, eval::ClassifierSpec::defaults(eval::ClassifierKind::Tcn), sets,
                                          eval::kfold_split(ds, 3, 0));
  std::string table;
  double no_fz_acc = NAN;
  for (const auto& r : rows) {
    table += fmt("%s %.4f, ", r.feature_id.c_str(), r.report.mean_accuracy);
    if (r.feature_id == no_fz.id()) no_fz_acc = r.report.mean_accuracy;
  }
  const bool first = rows.front().feature_id == "fz";
  const bool chance = std::abs(no_fz_acc - 0.25) <= 0.05;
  return {first && chance, fmt("TCN ranking: %sfz first: %s; without fz %.4f (|acc - 0.25| <= 0.05)", table.c_str(),
                               first ? "yes" : "no", no_fz_acc)};
}

Outcome confusion_adjacency() {
  std::size_t near = 0, far = 0;
  std::string accs;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    synth::GenConfig cfg;
    cfg.trials_per_class = 60;
    cfg.noise_std = 0.3;
    cfg.seed = seed;
    const auto ds = synth::generate(cfg);
    const auto r = eval::run_cv(ds, eval::ClassifierSpec::defaults(eval::ClassifierKind::Tcn), FeatureSet::all(),
                                eval::kfold_split(ds, 3, seed));
    near += r.confusions_at_distance(1);
    far += r.confusions_beyond(1);
    accs += fmt("%.4f ", r.mean_accuracy);
  }
  return {near > far, fmt("pooled TCN confusions: off-by-one %zu, off-by-two-or-more %zu (accuracy per seed %s)", near,
                          far, accs.c_str())};
}

Outcome cross_domain_gap() {
  const auto spec = eval::ClassifierSpec::defaults(eval::ClassifierKind::Tcn);
  const auto& same = benchmark_report(eval::ClassifierKind::Tcn);
  auto test_cfg = benchmark_config();
  test_cfg.domain_shift = 1.6;
  test_cfg.seed = 1;
  test_cfg.source = Source::Robot;
  const auto robot = synth::generate(test_cfg);
  const auto x = eval::cross_domain_eval(benchmark_data(), robot, spec, FeatureSet::all(), {}, 0);
  const double gap = same.mean_accuracy - x.accuracy;
  return {gap >= 0.15, fmt("TCN same-domain CV %.4f, shift 1.0 -> 1.6 %.4f, gap %.1f points (>= 15)",
                           same.mean_accuracy, x.accuracy, 100.0 * gap)};
}

// Permutation p-values for every Tukey pair: the fraction of label
// permutations whose largest studentized pairwise difference reaches the
// observed one.
std::vector<double> tukey_permutation_p(const std::vector<std::vector<double>>& groups, std::size_t resamples,
                                        std::mt19937_64& rng) {
  std::vector<double> pooled;
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) {
    pooled.insert(pooled.end(), g.begin(), g.end());
    sizes.push_back(g.size());
  }
  const std::size_t k = groups.size(), N = pooled.size();
  auto pair_q = [&](const std::vector<double>& v) {
    std::vector<double> means(k, 0.0);
    std::size_t off = 0;
    double ssw = 0.0;
    for (std::size_t g = 0; g < k; ++g) {
      for (std::size_t i = 0; i < sizes[g]; ++i) means[g] += v[off + i];
      means[g] /= static_cast<double>(sizes[g]);
      for (std::size_t i = 0; i < sizes[g]; ++i) ssw += (v[off + i] - means[g]) * (v[off + i] - means[g]);
      off += sizes[g];
    }
    const double msw = ssw / static_cast<double>(N - k);
    std::vector<double> q;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        q.push_back(std::abs(means[i] - means[j]) /
                    std::sqrt(msw / 2.0 * (1.0 / static_cast<double>(sizes[i]) + 1.0 / static_cast<double>(sizes[j]))));
    return q;
  };
  const auto observed = pair_q(pooled);
  std::vector<std::size_t> exceed(observed.size(), 0);
  auto shuffled = pooled;
  for (std::size_t r = 0; r < resamples; ++r) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto q = pair_q(shuffled);
    const double top = *std::max_element(q.begin(), q.end());
    for (std::size_t p = 0; p < observed.size(); ++p) exceed[p] += top >= observed[p];
  }
  std::vector<double> p;
  for (auto e : exceed) p.push_back((1.0 + static_cast<double>(e)) / (1.0 + static_cast<double>(resamples)));
  return p;
}

Outcome statistics() {
  // ANOVA instance. By hand: means 3, 4, 5 about 4 give SSB = 10, each group
  // contributes 10 to SSW = 30, df = (2, 12), F = (10 / 2) / (30 / 12) = 2.
  const std::vector<std::vector<double>> g3{{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}, {3, 4, 5, 6, 7}};
  const auto a = stats::anova_oneway(g3);
  const double F_oracle = (10.0 / 2.0) / (30.0 / 12.0);
  const double p_oracle = std::pow(1.0 + 2.0 * F_oracle / 12.0, -6.0);
  const bool anova_ok = std::abs(a.F - F_oracle) <= 1e-12 && std::abs(a.p - p_oracle) <= 0.001;
  // The quoted pair F = 2.5, p = 0.124 is the F(2, 12) tail evaluated at 2.5.
  const double tail_at_quoted = stats::f_sf(2.5, 2.0, 12.0);
  const bool quoted_tail_ok = std::abs(tail_at_quoted - 0.124) <= 0.001;

  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution shifted(0.5);
  std::size_t agree = 0, pairs = 0;
  for (int inst = 0; inst < 5; ++inst) {
    std::vector<std::vector<double>> g(3 + inst % 3, std::vector<double>(10));
    for (auto& grp : g) {
      const double mu = shifted(rng) ? 3.0 : 0.0;
      for (auto& x : grp) x = mu + normal(rng);
    }
    const auto hsd = stats::tukey_hsd(g);
    const auto perm = tukey_permutation_p(g, 100000, rng);
    for (std::size_t p = 0; p < perm.size(); ++p) {
      ++pairs;
      agree += hsd.pairs[p].significant == (perm[p] < 0.05);
    }
  }

  double f_t_err = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(8), y(8);
    for (auto& v : x) v = normal(rng);
    for (auto& v : y) v = normal(rng) + 0.5;
    const double t = stats::ttest_2tailed(x, y).t;
    const std::vector<std::vector<double>> two{x, y};
    const double F = stats::anova_oneway(two).F;
    f_t_err = std::max(f_t_err, std::abs(F - t * t) / std::max(1.0, F));
  }

  std::vector<double> ps;
  for (int sim = 0; sim < 2000; ++sim) {
    std::vector<double> x(5 + sim % 9), y(4 + sim % 13);
    const double sd = sim % 3 == 0 ? 2.5 : 1.0;
    for (auto& v : x) v = normal(rng);
    for (auto& v : y) v = sd * normal(rng);
    ps.push_back(stats::ttest_2tailed(x, y).p);
  }
  std::sort(ps.begin(), ps.end());
  double D = 0.0;
  const double n = static_cast<double>(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i)
    D = std::max({D, (static_cast<double>(i) + 1.0) / n - ps[i], ps[i] - static_cast<double>(i) / n});

  const bool ok = anova_ok && quoted_tail_ok && agree == pairs && f_t_err <= 1e-9 && D < 0.05;
  return {ok, fmt("ANOVA F %.6f p %.4f (hand oracle SSB 10, SSW 30: F %.1f p %.4f; the quoted F 2.5 / p 0.124 is the "
                  "F(2,12) tail at 2.5 = %.4f); Tukey vs 100k permutations %zu/%zu pairs agree; "
                  "|F - t^2| %.1e (<= 1e-9); KS D %.4f (< 0.05)",
                  a.F, a.p, F_oracle, p_oracle, tail_at_quoted, agree, pairs, f_t_err, D)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const auto dir = fs::temp_directory_path() / "haptix_acceptance_replay";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto invoke = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
  };
  const auto data = (dir / "data.jsonl").string();
  if (invoke({"synth", "--per-class", "12", "--seed", "4", "--noise", "0.2", "--out", data}) != 0)
    return {false, "synth failed"};
  std::size_t compared = 0, identical = 0;
  std::string runs;
  const std::vector<std::vector<std::string>> variants{{"--clf", "svm", "--features", "force+position"},
                                                       {"--clf", "hmm", "--features", "force,position"},
                                                       {"--clf", "tcn", "--epochs", "5", "--k", "4"}};
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const auto a = dir / ("a" + std::to_string(v)), b = dir / ("b" + std::to_string(v));
    std::vector<std::string> args{"evaluate", "--data", data, "--seed", "3", "--out", a.string()};
    args.insert(args.end(), variants[v].begin(), variants[v].end());
    if (invoke(args) != 0) return {false, "evaluate failed for variant " + std::to_string(v)};
    if (invoke({"evaluate", "--config", (a / "run.json").string(), "--out", b.string()}) != 0)
      return {false, "replay failed for variant " + std::to_string(v)};
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      identical += slurp(entry.path()) == slurp(b / entry.path().filename());
    }
    runs += variants[v][1] + " ";
  }
  fs::remove_all(dir);
  return {compared > 0 && identical == compared,
          fmt("%zu/%zu CSV reports byte-identical after replay from run.json (%s)", identical, compared,
              runs.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"HMM forward recursion vs path enumeration", forward_oracle},
      {"Baum-Welch monotonicity and one-state moments", baum_welch_checks},
      {"gradient checks", gradient_checks},
      {"preprocessing exactness", preprocessing_exactness},
      {"synthetic end-to-end accuracy", end_to_end},
      {"fz feature ablation", ablation},
      {"confusion adjacency", confusion_adjacency},
      {"cross-domain gap", cross_domain_gap},
      {"statistics", statistics},
      {"run.json replay", reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  if (selected.empty() || selected.count(11))
    std::printf("[SKIP] 11 recorded-dataset accuracy: optional, needs the external recordings in trial format\n");
  return failed == 0 ? 0 : 1;
}

#include "haptix/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "haptix/eval.hpp"
#include "haptix/synthgen.hpp"

namespace haptix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;

  // data
  std::string data;
  std::string train_data;
  std::string test_data;
  std::string model;

  // synth
  std::size_t per_class = 60;
  double noise = 0.05;
  double shift = 1.0;
  double rate = 120.0;
  double trial_duration = 1.5;
  std::string source = "human";
  bool fz_only = false;
  double pose_delay = kDefaultSensorDelay;

  // window
  WindowConfig window;

  // classifier
  std::string clf = "tcn";
  std::string features = "all";
  std::size_t states = 3;
  std::size_t hmm_iter = 100;
  double hmm_tol = 1e-4;
  double svm_c = 1.0;
  std::size_t svm_epochs = 200;
  std::size_t epochs = 0;  // 0 = classifier default
  double lr = 0.0;         // 0 = classifier default
  std::size_t batch = 32;
  std::string optimizer = "adam";
  std::size_t tcn_width = 32;
  std::size_t tcn_layers = 4;
  std::size_t kernel = 5;
  std::size_t hidden = 50;
  std::size_t lstm_layers = 2;
  bool per_step_loss = false;

  // evaluation
  std::size_t k = 3;
  std::string group_by = "none";
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Resolved values of every option of the active subcommand, for run.json.
class Registry {
 public:
  void add(const std::string& name, std::function<json()> get) { getters_.emplace_back(name, std::move(get)); }
  json snapshot() const {
    json j = json::object();
    for (const auto& [name, get] : getters_) j[name] = get();
    return j;
  }

 private:
  std::vector<std::pair<std::string, std::function<json()>>> getters_;
};

template <typename T>
CLI::Option* opt(CLI::App* app, Registry& reg, const std::string& name, T& var, const std::string& help) {
  reg.add(name, [&var] { return json(var); });
  return app->add_option("--" + name, var, help);
}

CLI::Option* flag(CLI::App* app, Registry& reg, const std::string& name, bool& var, const std::string& help) {
  reg.add(name, [&var] { return json(var); });
  return app->add_flag("--" + name, var, help);
}

void add_common(CLI::App* app, Registry& reg, Options& o, bool out_is_file = false) {
  app->add_option("--config", o.config, "Flat key=value file or run.json; command-line flags take precedence");
  opt(app, reg, "out", o.out, out_is_file ? "Output file" : "Output directory")->required();
  opt(app, reg, "seed", o.seed, "Random seed");
  app->add_option("--workers", o.workers, "Worker threads (0 = all cores)")->envname("HAPTIX_WORKERS");
}

void add_window(CLI::App* app, Registry& reg, Options& o) {
  opt(app, reg, "threshold", o.window.contact_threshold, "Contact force threshold (N)");
  opt(app, reg, "hold", o.window.contact_hold, "Contact hold time (s)");
  opt(app, reg, "duration", o.window.duration, "Window length after contact (s)");
  opt(app, reg, "sensor-delay", o.window.sensor_delay, "Pose stream lag behind the wrench stream (s)");
  opt(app, reg, "grid", o.window.grid, "Resampling grid length");
  flag(app, reg, "full-phase", o.window.full_phase, "Use the whole trial after contact instead of a fixed window");
}

void add_classifier(CLI::App* app, Registry& reg, Options& o) {
  opt(app, reg, "clf", o.clf, "Classifier: hmm, svm, tcn, lstm");
  opt(app, reg, "features", o.features, "Feature sets, comma separated");
  opt(app, reg, "states", o.states, "HMM hidden states");
  opt(app, reg, "hmm-iter", o.hmm_iter, "Baum-Welch iteration cap");
  opt(app, reg, "hmm-tol", o.hmm_tol, "Baum-Welch relative tolerance");
  opt(app, reg, "svm-c", o.svm_c, "SVM regularisation constant C");
  opt(app, reg, "svm-epochs", o.svm_epochs, "SVM epochs");
  opt(app, reg, "epochs", o.epochs, "Network training epochs (0 = default)");
  opt(app, reg, "lr", o.lr, "Network learning rate (0 = default)");
  opt(app, reg, "batch", o.batch, "Mini-batch size");
  opt(app, reg, "optimizer", o.optimizer, "adam or sgd");
  opt(app, reg, "tcn-width", o.tcn_width, "Channels per TCN layer");
  opt(app, reg, "tcn-layers", o.tcn_layers, "TCN convolution layers");
  opt(app, reg, "kernel", o.kernel, "TCN kernel size");
  opt(app, reg, "hidden", o.hidden, "LSTM hidden units");
  opt(app, reg, "lstm-layers", o.lstm_layers, "LSTM layers");
  flag(app, reg, "per-step-loss", o.per_step_loss, "LSTM loss at every step instead of the last");
}

void add_folds(CLI::App* app, Registry& reg, Options& o) {
  opt(app, reg, "k", o.k, "Number of folds");
  opt(app, reg, "group-by", o.group_by, "Fold grouping: none or subject");
}

// --epochs 0 and --lr 0 keep the default schedule.
eval::ClassifierSpec make_spec(const Options& o) {
  eval::ClassifierSpec s;
  s.kind = eval::parse_classifier(o.clf);
  s.hmm.states = o.states;
  s.hmm.max_iter = o.hmm_iter;
  s.hmm.tol = o.hmm_tol;
  s.svm.C = o.svm_c;
  s.svm.epochs = o.svm_epochs;
  s.nn = eval::default_train_config(s.kind);
  if (o.epochs != 0) s.nn.epochs = o.epochs;
  if (o.lr != 0.0) s.nn.learning_rate = o.lr;
  s.nn.batch_size = o.batch;
  if (o.optimizer == "adam")
    s.nn.optimizer = nn::Optimizer::Adam;
  else if (o.optimizer == "sgd")
    s.nn.optimizer = nn::Optimizer::Sgd;
  else
    throw std::invalid_argument("unknown optimizer '" + o.optimizer + "'");
  s.nn.validate();
  s.tcn_widths.assign(o.tcn_layers, o.tcn_width);
  s.tcn_kernel = o.kernel;
  s.lstm_hidden = o.hidden;
  s.lstm_layers = o.lstm_layers;
  s.lstm_per_step_loss = o.per_step_loss;
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw std::invalid_argument("empty feature-set list");
  return out;
}

FeatureSet parse_feature_union(const std::string& s) {
  FeatureSet u;
  for (const auto& item : split_list(s)) {
    const auto f = FeatureSet::parse(item);
    for (std::size_t c = 0; c < kNumRawChannels; ++c) u.channels[c] = u.channels[c] || f.channels[c];
    u.include_derivatives = u.include_derivatives || f.include_derivatives;
  }
  u.validate();
  return u;
}

json window_json(const WindowConfig& w) {
  return {{"sensor_delay", w.sensor_delay}, {"contact_threshold", w.contact_threshold},
          {"contact_hold", w.contact_hold}, {"duration", w.duration},
          {"full_phase", w.full_phase},     {"grid", w.grid}};
}

WindowConfig window_from_json(const json& j) {
  WindowConfig w;
  w.sensor_delay = j.at("sensor_delay").get<double>();
  w.contact_threshold = j.at("contact_threshold").get<double>();
  w.contact_hold = j.at("contact_hold").get<double>();
  w.duration = j.at("duration").get<double>();
  w.full_phase = j.at("full_phase").get<bool>();
  w.grid = j.at("grid").get<std::size_t>();
  return w;
}

Dataset read_trials(const std::string& path) {
  try {
    return load_trials(path);
  } catch (const MalformedRecord&) {
    std::throw_with_nested(DataError(path + ": invalid trial file"));
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string summary_line(const std::string& clf, const std::string& features, double mean, double sd) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s %.4f ± %.4f", clf.c_str(), features.c_str(), mean, sd);
  return buf;
}

void write_run_json(const fs::path& path, const std::string& command, const Registry& reg, json resolved) {
  json j{{"command", command}, {"args", reg.snapshot()}, {"resolved", std::move(resolved)}};
  write_file(path, j.dump(2) + "\n");
}

eval::FoldSplit make_split(const Dataset& ds, const Options& o) {
  if (o.group_by == "subject") return eval::kfold_split_by_subject(ds, o.k, o.seed);
  if (o.group_by != "none") throw std::invalid_argument("unknown --group-by '" + o.group_by + "'");
  return eval::kfold_split(ds, o.k, o.seed);
}

eval::CvOptions cv_options(const Options& o) {
  eval::CvOptions cv;
  cv.window = o.window;
  cv.workers = o.workers;
  return cv;
}

std::string prefix_of(const std::string& clf, const std::string& fs_id) { return clf + "_" + fs_id; }

json class_counts_json(const Dataset& ds) {
  json j = json::object();
  for (auto c : kAllClasses) j[std::string(to_string(c))] = ds.class_counts[class_index(c)];
  return j;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ingest(const Options& o, const Registry& reg, std::ostream& out) {
  const auto ds = read_trials(o.data);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_trials(dir / "trials.jsonl", ds);
  std::map<std::string, std::size_t> items;
  for (const auto& t : ds.trials) ++items[t.food_item];
  json summary{{"trials", ds.size()}, {"classes", class_counts_json(ds)}, {"items", items}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_run_json(dir / "run.json", "ingest", reg, summary);
  out << ds.size() << " trials";
  for (auto c : kAllClasses) out << ", " << to_string(c) << " " << ds.class_counts[class_index(c)];
  out << "\n";
  return kExitOk;
}

int cmd_synth(const Options& o, const Registry& reg, std::ostream& out) {
  synth::GenConfig g;
  g.trials_per_class = o.per_class;
  g.noise_std = o.noise;
  g.domain_shift = o.shift;
  g.sample_rate = o.rate;
  g.duration = o.trial_duration;
  g.seed = o.seed;
  g.source = parse_source(o.source);
  g.fz_only_signal = o.fz_only;
  g.pose_delay = o.pose_delay;
  const auto ds = synth::generate(g);
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_trials(path, ds);
  write_run_json(fs::path(o.out + ".run.json"), "synth", reg, {{"trials", ds.size()}});
  out << "wrote " << ds.size() << " trials to " << o.out << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, const Registry& reg, std::ostream& out) {
  const auto ds = read_trials(o.data);
  const auto spec = make_spec(o);
  const auto fset = parse_feature_union(o.features);
  auto prepared = prepare_dataset(ds, fset, o.window);
  const auto norm = fit_norm(prepared);
  for (auto& fm : prepared) norm.apply(fm);
  const auto clf = eval::make_trainer(spec)(prepared, o.seed);

  const fs::path dir(o.out);
  json model{{"features", fset.id()},
             {"window", window_json(o.window)},
             {"norm", {{"mean", norm.mean}, {"stddev", norm.stddev}, {"channel_names", norm.channel_names}}},
             {"classifier", clf->to_json()}};
  write_file(dir / "model.json", model.dump() + "\n");
  write_run_json(dir / "run.json", "train", reg,
                 {{"classifier", spec.to_json()}, {"features", fset.id()}, {"window", window_json(o.window)}});
  out << "trained " << spec.id() << " " << fset.id() << " on " << ds.size() << " trials\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o, const Registry& reg, std::ostream& out) {
  const auto ds = read_trials(o.data);
  const auto spec = make_spec(o);
  const auto fset = parse_feature_union(o.features);
  const auto split = make_split(ds, o);
  const auto report = eval::run_cv(ds, spec, fset, split, cv_options(o));

  const fs::path dir(o.out);
  const auto prefix = prefix_of(report.classifier, report.feature_set);
  write_file(dir / (prefix + "_report.json"), eval::report_to_json(report).dump(2) + "\n");
  write_file(dir / (prefix + "_confusion.csv"), eval::confusion_csv(report.confusion));
  write_file(dir / (prefix + "_confusion_normalized.csv"), eval::normalized_confusion_csv(report));
  write_file(dir / (prefix + "_folds.csv"), eval::folds_csv(report));
  write_file(dir / (prefix + "_item_confusion.csv"), eval::item_confusion_csv(report));
  write_run_json(dir / "run.json", "evaluate", reg,
                 {{"classifier", spec.to_json()},
                  {"features", fset.id()},
                  {"window", window_json(o.window)},
                  {"fold_sizes", split.fold_sizes()}});
  out << summary_line(report.classifier, report.feature_set, report.mean_accuracy, report.std_accuracy) << "\n";
  return kExitOk;
}

int cmd_ablate(const Options& o, const Registry& reg, std::ostream& out) {
  const auto ds = read_trials(o.data);
  const auto spec = make_spec(o);
  std::vector<FeatureSet> sets;
  for (const auto& item : split_list(o.features)) {
    sets.push_back(FeatureSet::parse(item));
    sets.back().validate();
  }
  const auto split = make_split(ds, o);
  const auto rows = eval::ablate_features(ds, spec, sets, split, cv_options(o));

  const fs::path dir(o.out);
  write_file(dir / (spec.id() + "_ablation.csv"), eval::ablation_csv(rows));
  json reports = json::array();
  for (const auto& r : rows) reports.push_back(eval::report_to_json(r.report));
  write_file(dir / (spec.id() + "_ablation.json"), reports.dump(2) + "\n");
  json ids = json::array();
  for (const auto& s : sets) ids.push_back(s.id());
  write_run_json(dir / "run.json", "ablate", reg,
                 {{"classifier", spec.to_json()}, {"feature_sets", ids}, {"window", window_json(o.window)}});
  for (const auto& r : rows)
    out << summary_line(spec.id(), r.feature_id, r.report.mean_accuracy, r.report.std_accuracy) << "\n";
  return kExitOk;
}

int cmd_cross_domain(const Options& o, const Registry& reg, std::ostream& out) {
  const auto train_ds = read_trials(o.train_data);
  const auto test_ds = read_trials(o.test_data);
  const auto spec = make_spec(o);
  const auto fset = parse_feature_union(o.features);
  const auto r = eval::cross_domain_eval(train_ds, test_ds, spec, fset, cv_options(o), o.seed);

  const fs::path dir(o.out);
  const auto prefix = prefix_of(r.classifier, r.feature_set);
  write_file(dir / (prefix + "_cross_domain.json"), eval::cross_domain_to_json(r).dump(2) + "\n");
  write_file(dir / (prefix + "_cross_domain_confusion.csv"), eval::confusion_csv(r.confusion));
  write_run_json(dir / "run.json", "cross-domain", reg,
                 {{"classifier", spec.to_json()}, {"features", fset.id()}, {"window", window_json(o.window)}});
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s %.4f", r.classifier.c_str(), r.feature_set.c_str(), r.accuracy);
  out << buf << "\n";
  return kExitOk;
}

int cmd_report(const Options& o, const Registry& reg, std::ostream& out) {
  const auto model = read_json(o.model);
  const auto ds = read_trials(o.data);
  std::unique_ptr<eval::Classifier> clf;
  FeatureSet fset;
  WindowConfig window;
  NormStats norm;
  try {
    clf = eval::classifier_from_json(model.at("classifier"));
    fset = FeatureSet::parse(model.at("features").get<std::string>());
    window = window_from_json(model.at("window"));
    const auto& n = model.at("norm");
    norm.mean = n.at("mean").get<std::vector<double>>();
    norm.stddev = n.at("stddev").get<std::vector<double>>();
    norm.channel_names = n.at("channel_names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(o.model + ": " + e.what());
  }
  const auto prepared = prepare_dataset(ds, fset, window);
  eval::CrossDomainReport r;
  r.classifier = model.at("classifier").value("kind", "");
  r.feature_set = fset.id();
  std::size_t correct = 0;
  for (const auto& fm : prepared) {
    const auto pred = clf->predict(norm.applied(fm));
    ++r.confusion[class_index(*fm.label)][class_index(pred)];
    if (pred == *fm.label) ++correct;
  }
  r.total = prepared.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);

  const fs::path dir(o.out);
  const auto prefix = prefix_of(r.classifier, r.feature_set);
  write_file(dir / (prefix + "_scored.json"), eval::cross_domain_to_json(r).dump(2) + "\n");
  write_file(dir / (prefix + "_scored_confusion.csv"), eval::confusion_csv(r.confusion));
  write_run_json(dir / "run.json", "report", reg, {{"features", fset.id()}, {"window", window_json(window)}});
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s %.4f", r.classifier.c_str(), r.feature_set.c_str(), r.accuracy);
  out << buf << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Config files

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_number()) return v.dump();
  throw DataError("config values must be scalars");
}

// Returns key/value pairs from a flat "key = value" file or a run.json.
std::vector<std::pair<std::string, std::string>> load_config(const std::string& path, const std::string& command) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  std::vector<std::pair<std::string, std::string>> kv;

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
    if (j.contains("command") && j["command"] != command)
      throw std::invalid_argument("config " + path + " was written by '" + j["command"].get<std::string>() +
                                  "', not '" + command + "'");
    const json& args = j.contains("args") ? j["args"] : j;
    for (const auto& [key, value] : args.items()) kv.emplace_back(key, json_scalar(value));
    return kv;
  }

  std::istringstream lines(text);
  std::string line;
  std::size_t no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(lines, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(path + ":" + std::to_string(no) + ": expected key = value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

// Inserts config entries right after the subcommand so that later
// command-line flags override them.
std::vector<std::string> inject_config(const std::vector<std::string>& args) {
  if (args.empty() || args[0].starts_with("-")) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> out{args[0]};
  for (const auto& [key, value] : load_config(path, args[0])) out.push_back("--" + key + "=" + value);
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

int exit_code_for(const std::exception& e) {
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    return exit_code_for(inner);
  } catch (...) {
    return kExitNumerical;
  }
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitData;
  if (dynamic_cast<const json::exception*>(&e)) return kExitData;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitUsage;
  return kExitNumerical;
}

void print_chain(std::ostream& err, const std::exception& e, int depth = 0) {
  err << (depth == 0 ? "error: " : "  caused by: ") << e.what() << "\n";
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_chain(err, inner, depth + 1);
  } catch (...) {
  }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  std::map<std::string, Registry> regs;

  CLI::App app{"Compliance classification of food items from fork force/torque and pose"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Validate a trial file and write a canonical copy with a summary");
  add_common(ingest, regs["ingest"], o);
  opt(ingest, regs["ingest"], "data", o.data, "Trial file (JSON lines)")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic trial file");
  {
    auto& r = regs["synth"];
    add_common(synth, r, o, true);
    opt(synth, r, "per-class", o.per_class, "Trials per class");
    opt(synth, r, "noise", o.noise, "Noise level (fraction of signal scale)");
    opt(synth, r, "shift", o.shift, "Force scale of the generated domain");
    opt(synth, r, "rate", o.rate, "Sample rate (Hz)");
    opt(synth, r, "trial-duration", o.trial_duration, "Trial length (s)");
    opt(synth, r, "source", o.source, "human or robot");
    opt(synth, r, "pose-delay", o.pose_delay, "Pose stream lag (s)");
    flag(synth, r, "fz-only", o.fz_only, "Put class information in fz only");
  }

  auto* train = app.add_subcommand("train", "Fit one classifier on a whole trial file");
  add_common(train, regs["train"], o);
  opt(train, regs["train"], "data", o.data, "Trial file")->required();
  add_window(train, regs["train"], o);
  add_classifier(train, regs["train"], o);

  auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validation of one classifier and feature set");
  add_common(evaluate, regs["evaluate"], o);
  opt(evaluate, regs["evaluate"], "data", o.data, "Trial file")->required();
  add_window(evaluate, regs["evaluate"], o);
  add_classifier(evaluate, regs["evaluate"], o);
  add_folds(evaluate, regs["evaluate"], o);

  auto* ablate = app.add_subcommand("ablate", "Cross-validate one classifier over several feature sets");
  add_common(ablate, regs["ablate"], o);
  opt(ablate, regs["ablate"], "data", o.data, "Trial file")->required();
  add_window(ablate, regs["ablate"], o);
  add_classifier(ablate, regs["ablate"], o);
  add_folds(ablate, regs["ablate"], o);

  auto* cross = app.add_subcommand("cross-domain", "Train on one trial file and test on another");
  add_common(cross, regs["cross-domain"], o);
  opt(cross, regs["cross-domain"], "train-data", o.train_data, "Training trial file")->required();
  opt(cross, regs["cross-domain"], "test-data", o.test_data, "Test trial file")->required();
  add_window(cross, regs["cross-domain"], o);
  add_classifier(cross, regs["cross-domain"], o);

  auto* report = app.add_subcommand("report", "Score a trained model on a trial file");
  add_common(report, regs["report"], o);
  opt(report, regs["report"], "model", o.model, "model.json written by train")->required();
  opt(report, regs["report"], "data", o.data, "Trial file")->required();

  try {
    auto args = inject_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    print_chain(err, e);
    return exit_code_for(e);
  }

  try {
    if (o.workers < 0) throw std::invalid_argument("--workers must be >= 0");
    const auto* sub = app.get_subcommands().front();
    const auto& name = sub->get_name();
    const auto& reg = regs.at(name);
    if (name == "ingest") return cmd_ingest(o, reg, out);
    if (name == "synth") return cmd_synth(o, reg, out);
    if (name == "train") return cmd_train(o, reg, out);
    if (name == "evaluate") return cmd_evaluate(o, reg, out);
    if (name == "ablate") return cmd_ablate(o, reg, out);
    if (name == "cross-domain") return cmd_cross_domain(o, reg, out);
    if (name == "report") return cmd_report(o, reg, out);
    err << "usage error: unknown command\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    print_chain(err, e);
    return exit_code_for(e);
  }
}

}  // namespace haptix::cli

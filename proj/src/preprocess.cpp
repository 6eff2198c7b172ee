#include "haptix/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace haptix {

namespace {

constexpr double kTimeEps = 1e-12;
constexpr std::array<std::string_view, 4> kGroupNames{"force", "torque", "position", "rotation"};

double channel_value(const WrenchSample& w, std::size_t c) {
  switch (c) {
    case 0: return w.fx;
    case 1: return w.fy;
    case 2: return w.fz;
    case 3: return w.tx;
    case 4: return w.ty;
    default: return w.tz;
  }
}

double channel_value(const PoseSample& p, std::size_t c) {
  switch (c) {
    case 6: return p.px;
    case 7: return p.py;
    case 8: return p.pz;
    case 9: return p.rx;
    case 10: return p.ry;
    default: return p.rz;
  }
}

bool group_selected(const std::array<bool, kNumRawChannels>& ch, std::size_t g) {
  return ch[3 * g] && ch[3 * g + 1] && ch[3 * g + 2];
}

template <class Sample>
std::vector<Sample> restrict_stream(const std::vector<Sample>& s, double t0, double t1) {
  std::vector<Sample> out;
  for (const auto& x : s) {
    if (x.t < t0 - kTimeEps || x.t > t1 + kTimeEps) continue;
    Sample y = x;
    y.t = std::max(0.0, x.t - t0);
    out.push_back(y);
  }
  return out;
}

}  // namespace

FeatureSet FeatureSet::from_groups(bool force, bool torque, bool position, bool rotation, bool derivatives) {
  FeatureSet fs;
  const std::array<bool, 4> groups{force, torque, position, rotation};
  for (std::size_t g = 0; g < 4; ++g) {
    for (std::size_t k = 0; k < 3; ++k) fs.channels[3 * g + k] = groups[g];
  }
  fs.include_derivatives = derivatives;
  return fs;
}

FeatureSet FeatureSet::all(bool derivatives) { return from_groups(true, true, true, true, derivatives); }

FeatureSet FeatureSet::single(Channel c, bool derivatives) {
  FeatureSet fs;
  fs.channels[static_cast<std::size_t>(c)] = true;
  fs.include_derivatives = derivatives;
  return fs;
}

FeatureSet FeatureSet::parse(std::string_view spec) {
  if (spec.empty()) throw std::invalid_argument("empty feature set");
  std::string s(spec);
  std::optional<bool> deriv;
  constexpr std::string_view kNoDeriv = "-deriv";
  if (s.size() > kNoDeriv.size() && s.ends_with(kNoDeriv)) {
    s.resize(s.size() - kNoDeriv.size());
    deriv = false;
  }
  FeatureSet fs;
  bool saw_all = false;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t plus = s.find('+', start);
    const std::string tok = s.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
    start = plus == std::string::npos ? s.size() + 1 : plus + 1;
    if (tok.empty()) throw std::invalid_argument("empty token in feature set '" + std::string(spec) + "'");
    if (tok == "deriv") {
      if (deriv == false) throw std::invalid_argument("feature set both adds and removes derivatives");
      deriv = true;
      continue;
    }
    if (tok == "all") {
      fs.channels.fill(true);
      saw_all = true;
      continue;
    }
    bool matched = false;
    for (std::size_t g = 0; g < kGroupNames.size(); ++g) {
      if (tok == kGroupNames[g]) {
        for (std::size_t k = 0; k < 3; ++k) fs.channels[3 * g + k] = true;
        matched = true;
      }
    }
    for (std::size_t c = 0; c < kNumRawChannels && !matched; ++c) {
      if (tok == kChannelNames[c]) {
        fs.channels[c] = true;
        matched = true;
      }
    }
    if (!matched) throw std::invalid_argument("unknown feature token '" + tok + "'");
  }
  fs.include_derivatives = deriv.value_or(saw_all);
  fs.validate();
  return fs;
}

bool FeatureSet::include_force() const noexcept { return group_selected(channels, 0); }
bool FeatureSet::include_torque() const noexcept { return group_selected(channels, 1); }
bool FeatureSet::include_position() const noexcept { return group_selected(channels, 2); }
bool FeatureSet::include_rotation() const noexcept { return group_selected(channels, 3); }

std::size_t FeatureSet::raw_count() const noexcept {
  return static_cast<std::size_t>(std::count(channels.begin(), channels.end(), true));
}

std::vector<std::string> FeatureSet::channel_names() const {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < kNumRawChannels; ++c) {
    if (channels[c]) names.emplace_back(kChannelNames[c]);
  }
  if (include_derivatives) {
    const std::size_t n = names.size();
    for (std::size_t i = 0; i < n; ++i) names.push_back("d_" + names[i]);
  }
  return names;
}

std::string FeatureSet::id() const {
  if (raw_count() == kNumRawChannels) return include_derivatives ? "all" : "all-deriv";
  std::string out;
  auto append = [&out](std::string_view tok) {
    if (!out.empty()) out += '+';
    out += tok;
  };
  for (std::size_t g = 0; g < 4; ++g) {
    if (group_selected(channels, g)) {
      append(kGroupNames[g]);
    } else {
      for (std::size_t k = 0; k < 3; ++k) {
        if (channels[3 * g + k]) append(kChannelNames[3 * g + k]);
      }
    }
  }
  if (include_derivatives) append("deriv");
  return out;
}

void FeatureSet::validate() const {
  if (raw_count() == 0) throw std::invalid_argument("feature set selects no channels");
}

void NormStats::apply(FeatureMatrix& fm) const {
  if (mean.size() != fm.cols || stddev.size() != fm.cols) {
    throw DimensionMismatch("normalisation statistics cover " + std::to_string(mean.size()) + " channels, matrix has " +
                            std::to_string(fm.cols));
  }
  if (!channel_names.empty() && channel_names != fm.channel_names) {
    throw DimensionMismatch("normalisation statistics were fitted on different channels");
  }
  for (std::size_t r = 0; r < fm.rows; ++r) {
    for (std::size_t c = 0; c < fm.cols; ++c) {
      fm(r, c) = (fm(r, c) - mean[c]) / stddev[c];
    }
  }
}

double detect_contact(const Trial& trial, double threshold, double hold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("detect_contact: threshold must be positive");
  if (!(hold >= 0.0)) throw std::invalid_argument("detect_contact: hold must be non-negative");
  const auto& w = trial.wrench;
  std::optional<double> run_start;
  for (const auto& s : w) {
    const double mag = std::sqrt(s.fx * s.fx + s.fy * s.fy + s.fz * s.fz);
    if (mag >= threshold) {
      if (!run_start) run_start = s.t;
      if (s.t - *run_start >= hold - kTimeEps) return *run_start;
    } else {
      run_start.reset();
    }
  }
  throw NoContact("trial '" + trial.id + "': force never stays above " + std::to_string(threshold) + " N for " +
                  std::to_string(hold) + " s");
}

Window extract_window(const Trial& trial, double t0, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("extract_window: duration must be positive");
  if (!std::isfinite(t0)) throw std::invalid_argument("extract_window: t0 must be finite");
  const double t1 = t0 + duration;
  Window w;
  w.trial = trial;
  w.trial.wrench = restrict_stream(trial.wrench, t0, t1);
  w.trial.pose = restrict_stream(trial.pose, t0, t1);
  if (w.trial.wrench.size() < 2 || w.trial.pose.size() < 2) {
    throw DegenerateStream("trial '" + trial.id + "': fewer than 2 samples inside the acquisition window");
  }
  const bool wrench_short = trial.wrench.empty() || trial.wrench.back().t <= t1;
  const bool pose_short = trial.pose.empty() || trial.pose.back().t <= t1;
  w.truncated = wrench_short || pose_short;
  return w;
}

std::vector<double> resample_linear(std::span<const double> t, std::span<const double> v, std::size_t n) {
  if (t.size() != v.size()) throw std::invalid_argument("resample_linear: time and value lengths differ");
  if (n < 2) throw std::invalid_argument("resample_linear: n must be >= 2");
  if (t.size() < 2) throw DegenerateSeries("series has fewer than 2 points");
  const double first = t.front();
  const double last = t.back();
  const double span = last - first;
  if (!(span > 0.0)) throw DegenerateSeries("series has zero time span");

  std::vector<double> out(n);
  const double step = span / static_cast<double>(n - 1);
  // Grid times within rounding of a sample time take that sample's value.
  const double snap = 1e-12 * span;
  std::size_t k = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double tg = first + static_cast<double>(i) * step;
    while (k + 2 < t.size() && t[k + 1] <= tg + snap) ++k;
    if (std::abs(tg - t[k]) <= snap) {
      out[i] = v[k];
    } else {
      const double frac = (tg - t[k]) / (t[k + 1] - t[k]);
      out[i] = v[k] + (v[k + 1] - v[k]) * frac;
    }
  }
  out[n - 1] = v.back();
  return out;
}

std::vector<double> first_derivative(std::span<const double> values, double dt) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("first_derivative: need at least 2 values");
  if (!(dt > 0.0)) throw std::invalid_argument("first_derivative: dt must be positive");
  std::vector<double> d(n);
  if (n == 2) {
    d[0] = d[1] = (values[1] - values[0]) / dt;
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
  d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dt);
  return d;
}

NormStats fit_norm(std::span<const FeatureMatrix> train) {
  if (train.empty()) throw EmptyTrainingSet();
  const std::size_t cols = train.front().cols;
  const auto& names = train.front().channel_names;
  std::size_t count = 0;
  for (const auto& fm : train) {
    if (fm.cols != cols || fm.channel_names != names) {
      throw DimensionMismatch("training matrices disagree on channels");
    }
    count += fm.rows;
  }
  if (count == 0) throw EmptyTrainingSet();

  NormStats st;
  st.channel_names = names;
  st.mean.assign(cols, 0.0);
  st.stddev.assign(cols, 0.0);
  for (const auto& fm : train) {
    for (std::size_t r = 0; r < fm.rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) st.mean[c] += fm(r, c);
    }
  }
  for (auto& m : st.mean) m /= static_cast<double>(count);
  for (const auto& fm : train) {
    for (std::size_t r = 0; r < fm.rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = fm(r, c) - st.mean[c];
        st.stddev[c] += d * d;
      }
    }
  }
  for (auto& s : st.stddev) s = std::max(std::sqrt(s / static_cast<double>(count)), kStdFloor);
  return st;
}

FeatureMatrix assemble_features(const Trial& window, const FeatureSet& fs, std::size_t grid) {
  fs.validate();
  if (grid < 2) throw std::invalid_argument("assemble_features: grid must be >= 2");

  std::vector<double> wt, pt;
  wt.reserve(window.wrench.size());
  pt.reserve(window.pose.size());
  for (const auto& w : window.wrench) wt.push_back(w.t);
  for (const auto& p : window.pose) pt.push_back(p.t);

  const std::size_t raw = fs.raw_count();
  FeatureMatrix fm;
  fm.rows = grid;
  fm.cols = fs.width();
  fm.values.assign(fm.rows * fm.cols, 0.0);
  fm.channel_names = fs.channel_names();
  fm.label = window.label;
  fm.food_item = window.food_item;
  fm.trial_id = window.id;

  std::vector<double> series;
  std::size_t col = 0;
  for (std::size_t c = 0; c < kNumRawChannels; ++c) {
    if (!fs.channels[c]) continue;
    const bool is_wrench = c < 6;
    series.clear();
    if (is_wrench) {
      for (const auto& w : window.wrench) series.push_back(channel_value(w, c));
    } else {
      for (const auto& p : window.pose) series.push_back(channel_value(p, c));
    }
    const auto& times = is_wrench ? wt : pt;
    const auto grid_values = resample_linear(times, series, grid);
    for (std::size_t r = 0; r < grid; ++r) fm(r, col) = grid_values[r];
    if (fs.include_derivatives) {
      const double dt = (times.back() - times.front()) / static_cast<double>(grid - 1);
      const auto d = first_derivative(grid_values, dt);
      for (std::size_t r = 0; r < grid; ++r) fm(r, raw + col) = d[r];
    }
    ++col;
  }
  return fm;
}

FeatureMatrix assemble_features(const Trial& window, const FeatureSet& fs, const NormStats& stats, std::size_t grid) {
  FeatureMatrix fm = assemble_features(window, fs, grid);
  stats.apply(fm);
  return fm;
}

FeatureMatrix prepare_trial(const Trial& trial, const FeatureSet& fs, const WindowConfig& cfg) {
  const Trial aligned = align_streams(trial, cfg.sensor_delay);
  const double t0 = detect_contact(aligned, cfg.contact_threshold, cfg.contact_hold);
  const double duration = cfg.full_phase ? std::numeric_limits<double>::infinity() : cfg.duration;
  const Window w = extract_window(aligned, t0, duration);
  return assemble_features(w.trial, fs, cfg.grid);
}

std::vector<FeatureMatrix> prepare_dataset(const Dataset& ds, const FeatureSet& fs, const WindowConfig& cfg,
                                           Exec exec) {
  std::vector<FeatureMatrix> out(ds.trials.size());
  parallel_for(ds.trials.size(), exec, [&](std::size_t i) { out[i] = prepare_trial(ds.trials[i], fs, cfg); });
  return out;
}

}  // namespace haptix

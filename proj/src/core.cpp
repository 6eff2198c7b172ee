#include "haptix/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace haptix {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames{"hard-skin", "hard", "medium", "soft"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

template <class Sample>
void check_stream(const std::vector<Sample>& s, const char* name, const std::string& id) {
  if (s.size() < 2) {
    throw DegenerateStream("trial '" + id + "': " + name + " stream has fewer than 2 samples");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i].t) || s[i].t < 0.0) {
      throw DataError("trial '" + id + "': " + name + " timestamp negative or non-finite");
    }
    if (i > 0 && !(s[i].t > s[i - 1].t)) {
      throw DataError("trial '" + id + "': " + name + " timestamps not strictly increasing");
    }
  }
}

double number_at(const json& row, std::size_t i, std::size_t line_no, const char* stream) {
  const json& v = row.at(i);
  if (!v.is_number()) {
    throw MalformedRecord(line_no, std::string(stream) + " entry is not a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw MalformedRecord(line_no, std::string(stream) + " entry is not finite");
  }
  return x;
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw MalformedRecord(line_no, std::string("missing field '") + key + "'");
  }
  return *it;
}

}  // namespace

std::string_view to_string(ComplianceClass c) noexcept { return kClassNames[class_index(c)]; }

ComplianceClass parse_class(std::string_view name) {
  std::string n = lower(name);
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "hardskin") n = "hard-skin";
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == n) return kAllClasses[i];
  }
  throw DataError("unknown compliance class '" + std::string(name) + "'");
}

std::string_view to_string(Source s) noexcept { return s == Source::Human ? "human" : "robot"; }

Source parse_source(std::string_view name) {
  const std::string n = lower(name);
  if (n == "human") return Source::Human;
  if (n == "robot") return Source::Robot;
  throw DataError("unknown source '" + std::string(name) + "'");
}

std::string canonical_food_name(std::string_view name) {
  std::string n = lower(name);
  std::replace(n.begin(), n.end(), ' ', '_');
  std::replace(n.begin(), n.end(), '-', '_');
  return n;
}

std::size_t food_item_index(std::string_view name) {
  const std::string n = canonical_food_name(name);
  for (std::size_t i = 0; i < kFoodItems.size(); ++i) {
    if (kFoodItems[i].name == n) return i;
  }
  throw UnknownFoodItem(std::string(name));
}

ComplianceClass food_class(std::string_view name) { return kFoodItems[food_item_index(name)].label; }

void validate(const Trial& trial) {
  check_stream(trial.wrench, "wrench", trial.id);
  check_stream(trial.pose, "pose", trial.id);
  for (const auto& w : trial.wrench) {
    if (!finite_all({w.fx, w.fy, w.fz, w.tx, w.ty, w.tz})) {
      throw DataError("trial '" + trial.id + "': non-finite wrench sample");
    }
  }
  for (const auto& p : trial.pose) {
    if (!finite_all({p.px, p.py, p.pz, p.rx, p.ry, p.rz})) {
      throw DataError("trial '" + trial.id + "': non-finite pose sample");
    }
  }
  if (food_class(trial.food_item) != trial.label) {
    throw DataError("trial '" + trial.id + "': label disagrees with food item");
  }
  if (trial.session < 1) {
    throw DataError("trial '" + trial.id + "': session must be >= 1");
  }
}

Dataset Dataset::from_trials(std::vector<Trial> trials) {
  Dataset ds;
  ds.trials = std::move(trials);
  for (const auto& t : ds.trials) ++ds.class_counts[class_index(t.label)];
  return ds;
}

double wrap_angle(double radians) noexcept {
  constexpr double pi = std::numbers::pi;
  if (radians > -pi && radians <= pi) return radians;
  double r = std::remainder(radians, 2.0 * pi);  // [-pi, pi]
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

std::array<double, 3> quaternion_to_fixed_xyz(double qx, double qy, double qz, double qw) {
  const double norm = std::sqrt(qx * qx + qy * qy + qz * qz + qw * qw);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DataError("quaternion has zero or non-finite norm");
  }
  qx /= norm;
  qy /= norm;
  qz /= norm;
  qw /= norm;
  const double rx = std::atan2(2.0 * (qw * qx + qy * qz), 1.0 - 2.0 * (qx * qx + qy * qy));
  const double ry = std::asin(std::clamp(2.0 * (qw * qy - qz * qx), -1.0, 1.0));
  const double rz = std::atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz));
  return {wrap_angle(rx), wrap_angle(ry), wrap_angle(rz)};
}

Trial parse_trial(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
  if (!obj.is_object()) throw MalformedRecord(line_no, "record is not a JSON object");

  Trial t;
  try {
    t.id = require(obj, "id", line_no).get<std::string>();
    const json& subject = require(obj, "subject", line_no);
    t.subject = subject.is_string() ? subject.get<std::string>() : subject.dump();
    const json& session = require(obj, "session", line_no);
    if (!session.is_number_integer() || session.get<long long>() < 1) {
      throw MalformedRecord(line_no, "session must be an integer >= 1");
    }
    t.session = session.get<int>();
    t.food_item = require(obj, "food_item", line_no).get<std::string>();
    t.source = parse_source(require(obj, "source", line_no).get<std::string>());
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  } catch (const MalformedRecord&) {
    throw;
  } catch (const DataError& e) {
    throw MalformedRecord(line_no, e.what());
  }
  // Unknown items are rejected with their own error type.
  t.label = food_class(t.food_item);
  t.food_item = canonical_food_name(t.food_item);

  const json& wrench = require(obj, "wrench", line_no);
  const json& pose = require(obj, "pose", line_no);
  if (!wrench.is_array() || !pose.is_array()) throw MalformedRecord(line_no, "streams must be arrays");

  t.wrench.reserve(wrench.size());
  for (const json& row : wrench) {
    if (!row.is_array() || row.size() != 7) throw MalformedRecord(line_no, "wrench rows need 7 numbers");
    t.wrench.push_back({number_at(row, 0, line_no, "wrench"), number_at(row, 1, line_no, "wrench"),
                        number_at(row, 2, line_no, "wrench"), number_at(row, 3, line_no, "wrench"),
                        number_at(row, 4, line_no, "wrench"), number_at(row, 5, line_no, "wrench"),
                        number_at(row, 6, line_no, "wrench")});
  }
  t.pose.reserve(pose.size());
  for (const json& row : pose) {
    if (!row.is_array() || (row.size() != 7 && row.size() != 8)) {
      throw MalformedRecord(line_no, "pose rows need 7 numbers (euler) or 8 (quaternion x,y,z,w)");
    }
    PoseSample p{number_at(row, 0, line_no, "pose"), number_at(row, 1, line_no, "pose"),
                 number_at(row, 2, line_no, "pose"), number_at(row, 3, line_no, "pose")};
    if (row.size() == 7) {
      p.rx = wrap_angle(number_at(row, 4, line_no, "pose"));
      p.ry = wrap_angle(number_at(row, 5, line_no, "pose"));
      p.rz = wrap_angle(number_at(row, 6, line_no, "pose"));
    } else {
      try {
        const auto r = quaternion_to_fixed_xyz(number_at(row, 4, line_no, "pose"), number_at(row, 5, line_no, "pose"),
                                               number_at(row, 6, line_no, "pose"), number_at(row, 7, line_no, "pose"));
        p.rx = r[0];
        p.ry = r[1];
        p.rz = r[2];
      } catch (const DataError& e) {
        throw MalformedRecord(line_no, e.what());
      }
    }
    t.pose.push_back(p);
  }

  try {
    validate(t);
  } catch (const DataError& e) {
    throw MalformedRecord(line_no, e.what());
  }
  return t;
}

std::string format_trial(const Trial& t) {
  json w = json::array();
  for (const auto& s : t.wrench) w.push_back({s.t, s.fx, s.fy, s.fz, s.tx, s.ty, s.tz});
  json p = json::array();
  for (const auto& s : t.pose) p.push_back({s.t, s.px, s.py, s.pz, s.rx, s.ry, s.rz});
  json obj = json::object();
  obj["id"] = t.id;
  obj["subject"] = t.subject;
  obj["session"] = t.session;
  obj["food_item"] = t.food_item;
  obj["source"] = std::string(to_string(t.source));
  obj["wrench"] = std::move(w);
  obj["pose"] = std::move(p);
  return obj.dump();
}

Dataset read_trials(std::istream& in) {
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    trials.push_back(parse_trial(line, line_no));
  }
  if (trials.empty()) throw EmptyDataset();
  return Dataset::from_trials(std::move(trials));
}

Dataset load_trials(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trial file '" + path.string() + "'");
  return read_trials(in);
}

void write_trials(std::ostream& out, const Dataset& ds) {
  for (const auto& t : ds.trials) out << format_trial(t) << '\n';
}

void save_trials(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trial file '" + path.string() + "'");
  write_trials(out, ds);
}

Trial align_streams(const Trial& trial, double delay) {
  if (!std::isfinite(delay)) throw std::invalid_argument("align_streams: delay must be finite");
  Trial out = trial;
  if (delay == 0.0) return out;
  out.pose.clear();
  for (const auto& p : trial.pose) {
    PoseSample s = p;
    s.t = p.t - delay;
    if (s.t >= 0.0) out.pose.push_back(s);
  }
  if (out.pose.size() < 2 || out.wrench.size() < 2) {
    throw DegenerateStream("trial '" + trial.id + "': fewer than 2 samples remain after alignment");
  }
  return out;
}

}  // namespace haptix

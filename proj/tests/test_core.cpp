#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "haptix/core.hpp"
#include "haptix/synthgen.hpp"
#include "test_support.hpp"

using namespace haptix;

namespace {

std::string record(const std::string& id, const std::string& item, const std::string& extra = "") {
  return R"({"id":")" + id + R"(","subject":"S1","session":1,"food_item":")" + item +
         R"(","source":"human","wrench":[[0,0,0,1,0,0,0],[0.01,0,0,2,0,0,0]],)" +
         R"("pose":[[0,0,0,0.1,0,0,0],[0.01,0,0,0.09,0,0,0]])" + extra + "}";
}

}  // namespace

TEST_CASE("compliance classes are totally ordered with adjacency distance") {
  CHECK(kAllClasses.size() == 4);
  CHECK(adjacency_distance(ComplianceClass::HardSkin, ComplianceClass::Hard) == 1);
  CHECK(adjacency_distance(ComplianceClass::Soft, ComplianceClass::Medium) == 1);
  CHECK(adjacency_distance(ComplianceClass::HardSkin, ComplianceClass::Soft) == 3);
  for (auto c : kAllClasses) CHECK(parse_class(to_string(c)) == c);
  CHECK_THROWS_AS(parse_class("squishy"), DataError);
}

TEST_CASE("item table maps three items to each class") {
  std::array<int, kNumClasses> per_class{};
  for (const auto& item : kFoodItems) ++per_class[class_index(item.label)];
  for (int n : per_class) CHECK(n == 3);
  CHECK(food_class("grape") == ComplianceClass::HardSkin);
  CHECK(food_class("bell_pepper") == ComplianceClass::HardSkin);
  CHECK(food_class("Cherry Tomato") == ComplianceClass::HardSkin);
  CHECK(food_class("carrot") == ComplianceClass::Hard);
  CHECK(food_class("watermelon") == ComplianceClass::Medium);
  CHECK(food_class("egg") == ComplianceClass::Soft);
  CHECK_THROWS_AS(food_class("noodles"), UnknownFoodItem);
  CHECK_THROWS_AS(food_class("potato_salad"), UnknownFoodItem);
}

TEST_CASE("reading records preserves order and derives labels") {
  std::istringstream in(record("a", "grape") + "\n" + record("b", "banana") + "\n\n" + record("c", "celery") + "\n");
  const auto ds = read_trials(in);
  REQUIRE(ds.size() == 3);
  CHECK(ds.trials[0].id == "a");
  CHECK(ds.trials[1].id == "b");
  CHECK(ds.trials[2].id == "c");
  CHECK(ds.trials[0].label == ComplianceClass::HardSkin);
  CHECK(ds.trials[1].label == ComplianceClass::Soft);
  CHECK(ds.trials[2].label == ComplianceClass::Hard);
  CHECK(ds.class_counts == std::array<std::size_t, 4>{1, 1, 0, 1});
}

TEST_CASE("schema violations report the line") {
  SUBCASE("unknown item") {
    std::istringstream in(record("a", "noodles"));
    CHECK_THROWS_AS(read_trials(in), UnknownFoodItem);
  }
  SUBCASE("missing field") {
    std::istringstream in(record("a", "grape") + "\n" + R"({"id":"x","food_item":"grape"})");
    try {
      read_trials(in);
      FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("short wrench row") {
    auto r = record("a", "grape");
    r.replace(r.find("[0,0,0,1,0,0,0]"), 15, "[0,0,0,1,0,0]");
    std::istringstream in(r);
    CHECK_THROWS_AS(read_trials(in), MalformedRecord);
  }
  SUBCASE("non-increasing time") {
    auto r = record("a", "grape");
    r.replace(r.find("[0.01,0,0,2"), 5, "[0.00");
    std::istringstream in(r);
    CHECK_THROWS_AS(read_trials(in), MalformedRecord);
  }
  SUBCASE("invalid session") {
    auto r = record("a", "grape");
    r.replace(r.find("\"session\":1"), 11, "\"session\":0");
    std::istringstream in(r);
    CHECK_THROWS_AS(read_trials(in), MalformedRecord);
  }
  SUBCASE("not json") {
    std::istringstream in("{nope");
    CHECK_THROWS_AS(read_trials(in), MalformedRecord);
  }
}

TEST_CASE("empty and missing files") {
  std::istringstream in("\n\n");
  CHECK_THROWS_AS(read_trials(in), EmptyDataset);
  CHECK_THROWS_AS(load_trials("/nonexistent/trials.jsonl"), DataError);
}

TEST_CASE("save then load is the identity") {
  std::mt19937_64 rng(11);
  std::vector<Trial> trials;
  for (int i = 0; i < 25; ++i) trials.push_back(test::random_trial(rng, "t" + std::to_string(i)));
  for (auto& t : trials)
    for (auto& p : t.pose) {
      p.rx = wrap_angle(p.rx);
      p.ry = wrap_angle(p.ry);
      p.rz = wrap_angle(p.rz);
    }
  const auto ds = Dataset::from_trials(trials);
  const auto path = std::filesystem::temp_directory_path() / "haptix_core_roundtrip.jsonl";
  save_trials(path, ds);
  const auto back = load_trials(path);
  CHECK(back == ds);
  std::filesystem::remove(path);
}

TEST_CASE("angles wrap into (-pi, pi]") {
  const double pi = std::numbers::pi;
  CHECK(wrap_angle(0.5) == 0.5);
  CHECK(wrap_angle(pi) == pi);
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi) == doctest::Approx(pi));
  CHECK(wrap_angle(2 * pi + 0.25) == doctest::Approx(0.25));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(w > -pi);
    CHECK(w <= pi);
    CHECK(std::remainder(a - w, 2 * pi) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("quaternion rows are converted to fixed-axis angles") {
  // Oracle: build the quaternion of R = Rz(c) Ry(b) Rx(a) by quaternion products.
  auto quat_mul = [](std::array<double, 4> p, std::array<double, 4> q) {  // (x, y, z, w)
    return std::array<double, 4>{p[3] * q[0] + p[0] * q[3] + p[1] * q[2] - p[2] * q[1],
                                 p[3] * q[1] - p[0] * q[2] + p[1] * q[3] + p[2] * q[0],
                                 p[3] * q[2] + p[0] * q[1] - p[1] * q[0] + p[2] * q[3],
                                 p[3] * q[3] - p[0] * q[0] - p[1] * q[1] - p[2] * q[2]};
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int i = 0; i < 200; ++i) {
    const double a = 2 * u(rng), b = u(rng), c = 2 * u(rng);
    const std::array<double, 4> qx{std::sin(a / 2), 0, 0, std::cos(a / 2)};
    const std::array<double, 4> qy{0, std::sin(b / 2), 0, std::cos(b / 2)};
    const std::array<double, 4> qz{0, 0, std::sin(c / 2), std::cos(c / 2)};
    const auto q = quat_mul(qz, quat_mul(qy, qx));
    const auto e = quaternion_to_fixed_xyz(q[0], q[1], q[2], q[3]);
    CHECK(e[0] == doctest::Approx(a).epsilon(1e-9));
    CHECK(e[1] == doctest::Approx(b).epsilon(1e-9));
    CHECK(e[2] == doctest::Approx(c).epsilon(1e-9));
  }

  const double h = std::sqrt(0.5);
  auto r = record("q", "apple");
  r.replace(r.find("[0,0,0,0.1,0,0,0]"), 17, "[0,0,0,0.1,0,0," + std::to_string(h) + "," + std::to_string(h) + "]");
  r.replace(r.find("[0.01,0,0,0.09,0,0,0]"), 21, "[0.01,0,0,0.09,0,0,0,1]");
  const auto t = parse_trial(r);
  CHECK(t.pose[0].rz == doctest::Approx(std::numbers::pi / 2).epsilon(1e-5));
  CHECK(t.pose[1].rz == 0.0);
}

TEST_CASE("align_streams shifts pose time and drops negative stamps") {
  auto t = test::blank_trial("a", "grape", 3, 1.0 / 0.03);
  CHECK(align_streams(t, 0.0) == t);

  const auto a = align_streams(t, 0.03);
  REQUIRE(a.pose.size() == 2);
  CHECK(a.pose[0].t == doctest::Approx(0.0));
  CHECK(a.pose[1].t == doctest::Approx(0.03));
  CHECK(a.wrench == t.wrench);

  CHECK_THROWS_AS(align_streams(t, 0.05), DegenerateStream);
  CHECK_THROWS_AS(align_streams(t, std::nan("")), std::invalid_argument);
}

TEST_CASE("alignment composes additively") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(0.0, 0.02);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto t = test::random_trial(rng, "r");
    const double a = d(rng), b = d(rng);
    Trial two, one;
    try {
      two = align_streams(align_streams(t, a), b);
      one = align_streams(t, a + b);
    } catch (const DegenerateStream&) {
      continue;
    }
    REQUIRE(one.pose.size() == two.pose.size());
    for (std::size_t j = 0; j < one.pose.size(); ++j) CHECK(std::abs(one.pose[j].t - two.pose[j].t) < 1e-12);
    CHECK(one.wrench == two.wrench);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("alignment removes a known pose lag: cross-correlation oracle") {
  // One physical event: a force pulse while the fork moves fastest. The pose
  // stream is stamped 30 ms late.
  const double rate = 120.0, lag = 0.030, t0 = 0.6, w = 0.04;
  Trial t;
  t.id = "xc";
  t.subject = "S1";
  t.food_item = "apple";
  t.label = ComplianceClass::Hard;
  for (int i = 0; i < 180; ++i) {
    const double time = i / rate;
    const double g = std::exp(-0.5 * std::pow((time - t0) / w, 2));
    t.wrench.push_back({time, 0, 0, 10 * g, 0, 0, 0});
    const double true_time = time - lag;
    const double z = 0.1 - 0.05 * 0.5 * (1 + std::erf((true_time - t0) / (w * std::numbers::sqrt2)));
    t.pose.push_back({time, 0, 0, z, 0, 0, 0});
  }

  // |F| sampled at wrench times vs fork speed linearly interpolated at the same times.
  auto peak_lag = [&](const Trial& tr) {
    std::vector<double> speed_t, speed;
    for (std::size_t i = 1; i < tr.pose.size(); ++i) {
      speed_t.push_back(0.5 * (tr.pose[i].t + tr.pose[i - 1].t));
      speed.push_back(std::abs(tr.pose[i].pz - tr.pose[i - 1].pz) / (tr.pose[i].t - tr.pose[i - 1].t));
    }
    std::vector<double> f, s;
    for (const auto& ws : tr.wrench) {
      if (ws.t < speed_t.front() || ws.t > speed_t.back()) continue;
      std::size_t k = 0;
      while (speed_t[k + 1] < ws.t) ++k;
      const double a = (ws.t - speed_t[k]) / (speed_t[k + 1] - speed_t[k]);
      f.push_back(std::abs(ws.fz));
      s.push_back(speed[k] + a * (speed[k + 1] - speed[k]));
    }
    int best = 0;
    double best_v = -1;
    for (int l = -10; l <= 10; ++l) {
      double v = 0;
      for (int i = 0; i < static_cast<int>(f.size()); ++i) {
        const int j = i + l;
        if (j >= 0 && j < static_cast<int>(s.size())) v += f[i] * s[j];
      }
      if (v > best_v) {
        best_v = v;
        best = l;
      }
    }
    return best;
  };

  CHECK(std::abs(peak_lag(t)) >= 3);
  CHECK(std::abs(peak_lag(align_streams(t, lag))) <= 1);
}

TEST_CASE("synthetic trials satisfy the core invariants") {
  synth::GenConfig cfg;
  cfg.trials_per_class = 5;
  const auto ds = synth::generate(cfg);
  for (const auto& t : ds.trials) CHECK_NOTHROW(validate(t));
}

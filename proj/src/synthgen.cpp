#include "haptix/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace haptix::synth {

namespace {

constexpr std::array<double, 4> kPeak{25.0, 20.0, 10.0, 3.0};
constexpr std::array<double, 4> kRise{0.30, 0.35, 0.30, 0.25};
constexpr std::array<double, 4> kDescent{0.030, 0.035, 0.040, 0.050};  // m/s
constexpr std::array<double, 3> kItemAmp{0.94, 1.00, 1.06};
constexpr std::array<double, 3> kItemTime{0.90, 1.00, 1.10};
constexpr double kPunctureRatio = 8.0 / 25.0;
constexpr double kPunctureTime = 0.04;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// fz before noise, tau = time since contact.
double fz_profile(std::size_t cls, double tau, double peak, double rise) {
  if (tau <= 0.0) return 0.0;
  if (tau < rise) return peak * tau / rise;
  if (cls != 0) return peak;
  const double after = tau - rise;
  if (after < kPunctureTime) return peak * (1.0 - (1.0 - kPunctureRatio) * after / kPunctureTime);
  return peak * kPunctureRatio;
}

// First-order autoregressive noise with stationary standard deviation sigma.
class Ar1 {
 public:
  Ar1(double rho, double sigma) : rho_(rho), scale_(sigma * std::sqrt(1.0 - rho * rho)), sigma_(sigma) {}
  double start(double z) { return state_ = sigma_ * z; }
  double next(double z) { return state_ = rho_ * state_ + scale_ * z; }

 private:
  double rho_, scale_, sigma_;
  double state_ = 0.0;
};

Trial make_trial(const GenConfig& cfg, std::size_t cls, std::size_t ordinal, std::size_t global_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(global_index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const std::size_t item = ordinal % 3;
  const auto& food = kFoodItems[3 * cls + item];
  const double s = cfg.domain_shift;

  // Per-trial draws; the draw order never depends on noise_std.
  const double t_contact = 0.325 + 0.075 * unit(rng);
  const double amp = std::max(0.2, 1.0 + cfg.noise_std * normal(rng));
  const double time_jitter = 1.0 + 0.05 * unit(rng);
  const double peak = kPeak[cls] * kItemAmp[item] * amp * s;
  const double rise = kRise[cls] * kItemTime[item] * time_jitter;
  const double speed_jitter = unit(rng);
  const double descent = cfg.fz_only_signal ? 0.04 * (1.0 + 0.25 * speed_jitter)
                                            : kDescent[cls] * (1.0 + 0.1 * speed_jitter);
  const double x0 = 0.05 * unit(rng);
  const double y0 = 0.05 * unit(rng);
  const double z0 = 0.12 + 0.02 * unit(rng);
  const double tilt_x = 0.05 * normal(rng);
  const double tilt_y = 0.05 * normal(rng);
  const double heading = std::numbers::pi * unit(rng);
  const bool slip = cls == 3 && !cfg.fz_only_signal;
  const double slip_freq = 2.0 + 0.5 * unit(rng);

  const double sensor = cfg.noise_std * s;  // N
  Ar1 fx_n(0.95, 0.1 * s), fy_n(0.95, 0.1 * s), tx_n(0.95, 0.005 * s), ty_n(0.95, 0.005 * s), tz_n(0.95, 0.002 * s);
  Ar1 px_n(0.98, 0.001), py_n(0.98, 0.001), rx_n(0.98, 0.01), ry_n(0.98, 0.01), rz_n(0.98, 0.01);

  auto tilt_signature = [&](double tau) { return tau > 0.0 ? std::sin(kTwoPi * slip_freq * tau) : 0.0; };

  Trial t;
  t.id = "synth-" + std::string(to_string(class_at(cls))) + "-" + std::to_string(ordinal);
  t.subject = "S" + std::to_string(1 + global_index % 8);
  t.session = 1 + static_cast<int>((ordinal / 3) % 4);
  t.food_item = std::string(food.name);
  t.label = food.label;
  t.source = cfg.source;

  const auto n = static_cast<std::size_t>(std::floor(cfg.duration * cfg.sample_rate)) + 1;
  t.wrench.reserve(n);
  t.pose.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double time = static_cast<double>(i) / cfg.sample_rate;
    const double tau = time - t_contact;
    const bool first = i == 0;
    auto ar = [&](Ar1& a) { return first ? a.start(normal(rng)) : a.next(normal(rng)); };

    WrenchSample w;
    w.t = time;
    w.fz = fz_profile(cls, tau, peak, rise) + sensor * normal(rng);
    w.fx = ar(fx_n) + sensor * normal(rng);
    w.fy = ar(fy_n) + sensor * normal(rng);
    if (slip) w.fx += 0.8 * s * tilt_signature(tau);
    w.tx = ar(tx_n) + 0.01 * sensor * normal(rng);
    w.ty = ar(ty_n) + 0.01 * sensor * normal(rng);
    w.tz = ar(tz_n) + 0.01 * sensor * normal(rng);
    t.wrench.push_back(w);
  }
  // Pose is stamped late by pose_delay: the sample stamped t holds the pose at t - delay.
  for (std::size_t i = 0; i < n; ++i) {
    const double stamp = static_cast<double>(i) / cfg.sample_rate;
    const double time = stamp - cfg.pose_delay;
    const double tau = time - t_contact;
    const bool first = i == 0;
    auto ar = [&](Ar1& a) { return first ? a.start(normal(rng)) : a.next(normal(rng)); };

    PoseSample p;
    p.t = stamp;
    const double pos_noise = cfg.noise_std * 0.002;
    const double rot_noise = cfg.noise_std * 0.01;
    p.px = x0 + ar(px_n) + pos_noise * normal(rng);
    p.py = y0 + ar(py_n) + pos_noise * normal(rng);
    p.pz = z0 - descent * time + pos_noise * normal(rng);
    p.rx = tilt_x + ar(rx_n) + rot_noise * normal(rng);
    if (slip) p.rx += 0.08 * tilt_signature(tau);
    p.ry = tilt_y + ar(ry_n) + rot_noise * normal(rng);
    p.rz = wrap_angle(heading + ar(rz_n) + rot_noise * normal(rng));
    t.pose.push_back(p);
  }
  return t;
}

}  // namespace

void GenConfig::validate() const {
  if (trials_per_class == 0) throw std::invalid_argument("trials_per_class must be >= 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw std::invalid_argument("noise_std must be >= 0");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw std::invalid_argument("sample_rate must be > 0");
  if (!(duration > 0.82) || !std::isfinite(duration)) throw std::invalid_argument("duration must exceed 0.82 s");
  if (!(domain_shift > 0.0) || !std::isfinite(domain_shift)) throw std::invalid_argument("domain_shift must be > 0");
  if (!(pose_delay >= 0.0) || pose_delay >= duration) throw std::invalid_argument("pose_delay out of range");
}

double nominal_peak(ComplianceClass c) noexcept { return kPeak[class_index(c)]; }

Dataset generate(const GenConfig& cfg, Exec exec) {
  cfg.validate();
  const std::size_t total = cfg.trials_per_class * kNumClasses;
  std::vector<Trial> trials(total);
  // Classes interleave: trial i belongs to class i % 4.
  parallel_for(total, exec, [&](std::size_t i) {
    trials[i] = make_trial(cfg, i % kNumClasses, i / kNumClasses, i);
  });
  return Dataset::from_trials(std::move(trials));
}

}  // namespace haptix::synth

#pragma once

#include <cstddef>
#include <cstdint>

#include "haptix/core.hpp"
#include "haptix/parallel.hpp"

namespace haptix::synth {

// Parameters of the synthetic trial generator.
//
// Every class has a canonical fz profile after contact (peak values at
// domain_shift = 1): hard-skin ramps to 25 N at ~0.3 s and punctures down to
// 8 N, hard ramps to 20 N and holds, medium to 10 N, soft to 3 N with a
// tilt-correlated lateral fx slip. noise_std scales both per-trial amplitude
// variation (relative) and per-sample sensor noise (noise_std x 1 N x shift).
struct GenConfig {
  std::size_t trials_per_class = 60;
  double noise_std = 0.05;
  double sample_rate = 120.0;  // Hz, both streams
  double duration = 1.5;       // s
  double domain_shift = 1.0;   // scales every force and torque
  std::uint64_t seed = 0;
  Source source = Source::Human;
  // Class information only in fz: no slip signature, no class-dependent descent speed.
  bool fz_only_signal = false;
  // Pose stream is stamped this late relative to the wrench stream.
  double pose_delay = kDefaultSensorDelay;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Deterministic given cfg; classes are exactly balanced and items rotate
/// within each class.
Dataset generate(const GenConfig& cfg, Exec exec = Exec::Parallel);

/// Nominal fz peak of a class before jitter (N, at domain_shift = 1).
double nominal_peak(ComplianceClass c) noexcept;

}  // namespace haptix::synth

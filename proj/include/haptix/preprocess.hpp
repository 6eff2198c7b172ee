#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "haptix/core.hpp"
#include "haptix/parallel.hpp"

namespace haptix {

// Raw channels in canonical feature order.
enum class Channel : std::uint8_t { Fx, Fy, Fz, Tx, Ty, Tz, Px, Py, Pz, Rx, Ry, Rz };
inline constexpr std::size_t kNumRawChannels = 12;
inline constexpr std::array<std::string_view, kNumRawChannels> kChannelNames{
    "fx", "fy", "fz", "tx", "ty", "tz", "px", "py", "pz", "rx", "ry", "rz"};

// Selected input channels. The four group flags of the classic feature sets
// (force, torque, position, rotation) map onto three channels each; single
// channels such as fz can be selected on their own.
struct FeatureSet {
  std::array<bool, kNumRawChannels> channels{};
  bool include_derivatives = false;

  static FeatureSet from_groups(bool force, bool torque, bool position, bool rotation, bool derivatives);
  static FeatureSet all(bool derivatives = true);
  static FeatureSet single(Channel c, bool derivatives = false);

  // Grammar: tokens joined by '+': force, torque, position, rotation, fx..rz,
  // all, deriv; a trailing "-deriv" removes derivatives. "all" implies
  // derivatives unless "-deriv" is given.
  static FeatureSet parse(std::string_view spec);

  bool include_force() const noexcept;
  bool include_torque() const noexcept;
  bool include_position() const noexcept;
  bool include_rotation() const noexcept;

  std::size_t raw_count() const noexcept;
  std::size_t width() const noexcept { return raw_count() * (include_derivatives ? 2 : 1); }
  std::vector<std::string> channel_names() const;
  /// Canonical identifier usable in file names ("all", "fz", "force+position-deriv").
  std::string id() const;
  /// Throws std::invalid_argument when no channel is selected.
  void validate() const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

// Row-major (time x channel) matrix on the fixed grid.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::string> channel_names;
  std::optional<ComplianceClass> label;
  std::string food_item;
  std::string trial_id;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::string> channel_names;

  /// z-scores every channel in place; throws DimensionMismatch on channel disagreement.
  void apply(FeatureMatrix& fm) const;
  FeatureMatrix applied(FeatureMatrix fm) const {
    apply(fm);
    return fm;
  }

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

inline constexpr double kStdFloor = 1e-8;
inline constexpr std::size_t kDefaultGrid = 64;

struct WindowConfig {
  double sensor_delay = kDefaultSensorDelay;
  double contact_threshold = 0.5;  // N
  double contact_hold = 0.05;      // s
  double duration = 0.82;          // s
  bool full_phase = false;         // window runs from contact to the end of the trial
  std::size_t grid = kDefaultGrid;
};

struct Window {
  Trial trial;
  bool truncated = false;
};

/// Earliest wrench time at which |F| >= threshold and stays there for hold
/// seconds. Throws NoContact.
double detect_contact(const Trial& trial, double threshold = 0.5, double hold = 0.05);

/// Restricts both streams to [t0, t0 + duration] and rebases time to 0.
Window extract_window(const Trial& trial, double t0, double duration = 0.82);

/// Linear interpolation of (t, v) onto n uniformly spaced times spanning
/// [t.front(), t.back()]. Endpoints are reproduced exactly.
std::vector<double> resample_linear(std::span<const double> t, std::span<const double> v,
                                    std::size_t n = kDefaultGrid);

/// Central differences inside, second-order one-sided differences at the ends
/// (first-order when n == 2).
std::vector<double> first_derivative(std::span<const double> values, double dt);

NormStats fit_norm(std::span<const FeatureMatrix> train);

FeatureMatrix assemble_features(const Trial& window, const FeatureSet& fs, std::size_t grid = kDefaultGrid);
FeatureMatrix assemble_features(const Trial& window, const FeatureSet& fs, const NormStats& stats,
                                std::size_t grid = kDefaultGrid);

/// align -> detect_contact -> extract_window -> assemble_features (no normalisation).
FeatureMatrix prepare_trial(const Trial& trial, const FeatureSet& fs, const WindowConfig& cfg = {});

/// prepare_trial over a whole dataset, one trial per task.
std::vector<FeatureMatrix> prepare_dataset(const Dataset& ds, const FeatureSet& fs, const WindowConfig& cfg = {},
                                           Exec exec = Exec::Parallel);

}  // namespace haptix

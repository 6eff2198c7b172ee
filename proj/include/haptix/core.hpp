#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haptix/errors.hpp"

namespace haptix {

// Compliance categories in decreasing stiffness. The enumerator value is the
// position in the total order; neighbours are at adjacency distance 1.
enum class ComplianceClass : std::uint8_t { HardSkin = 0, Hard = 1, Medium = 2, Soft = 3 };

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<ComplianceClass, kNumClasses> kAllClasses{
    ComplianceClass::HardSkin, ComplianceClass::Hard, ComplianceClass::Medium, ComplianceClass::Soft};

constexpr std::size_t class_index(ComplianceClass c) noexcept { return static_cast<std::size_t>(c); }
constexpr ComplianceClass class_at(std::size_t i) { return kAllClasses.at(i); }

constexpr int adjacency_distance(ComplianceClass a, ComplianceClass b) noexcept {
  const int d = static_cast<int>(a) - static_cast<int>(b);
  return d < 0 ? -d : d;
}

std::string_view to_string(ComplianceClass c) noexcept;
ComplianceClass parse_class(std::string_view name);

enum class Source : std::uint8_t { Human, Robot };

std::string_view to_string(Source s) noexcept;
Source parse_source(std::string_view name);

struct FoodItem {
  std::string_view name;
  ComplianceClass label;
};

// The twelve solid items, three per class, in class order.
inline constexpr std::array<FoodItem, 12> kFoodItems{{
    {"bell_pepper", ComplianceClass::HardSkin},
    {"cherry_tomato", ComplianceClass::HardSkin},
    {"grape", ComplianceClass::HardSkin},
    {"carrot", ComplianceClass::Hard},
    {"celery", ComplianceClass::Hard},
    {"apple", ComplianceClass::Hard},
    {"cantaloupe", ComplianceClass::Medium},
    {"watermelon", ComplianceClass::Medium},
    {"strawberry", ComplianceClass::Medium},
    {"banana", ComplianceClass::Soft},
    {"blackberry", ComplianceClass::Soft},
    {"egg", ComplianceClass::Soft},
}};

/// Lower-cases and maps spaces and hyphens to underscores ("Bell Pepper" -> "bell_pepper").
std::string canonical_food_name(std::string_view name);

/// Index into kFoodItems; throws UnknownFoodItem.
std::size_t food_item_index(std::string_view name);
ComplianceClass food_class(std::string_view name);

struct WrenchSample {
  double t = 0.0;
  double fx = 0.0, fy = 0.0, fz = 0.0;
  double tx = 0.0, ty = 0.0, tz = 0.0;
  friend bool operator==(const WrenchSample&, const WrenchSample&) = default;
};

struct PoseSample {
  double t = 0.0;
  double px = 0.0, py = 0.0, pz = 0.0;
  double rx = 0.0, ry = 0.0, rz = 0.0;
  friend bool operator==(const PoseSample&, const PoseSample&) = default;
};

struct Trial {
  std::string id;
  std::string subject;
  int session = 1;
  std::string food_item;
  ComplianceClass label = ComplianceClass::HardSkin;
  Source source = Source::Human;
  std::vector<WrenchSample> wrench;
  std::vector<PoseSample> pose;
  friend bool operator==(const Trial&, const Trial&) = default;
};

/// Throws DegenerateStream / DataError when a stream is short, unordered,
/// negative in time or non-finite, or when the label disagrees with the item.
void validate(const Trial& trial);

struct Dataset {
  std::vector<Trial> trials;
  std::array<std::size_t, kNumClasses> class_counts{};

  static Dataset from_trials(std::vector<Trial> trials);
  std::size_t size() const noexcept { return trials.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// JSON-lines trial format. One object per line; blank lines are skipped.
Trial parse_trial(std::string_view line, std::size_t line_no = 1);
std::string format_trial(const Trial& trial);

Dataset read_trials(std::istream& in);
Dataset load_trials(const std::filesystem::path& path);
void write_trials(std::ostream& out, const Dataset& ds);
void save_trials(const std::filesystem::path& path, const Dataset& ds);

/// Wraps an angle to (-pi, pi]. Values already in range are returned unchanged.
double wrap_angle(double radians) noexcept;

/// Unit quaternion (x, y, z, w) to fixed-axis XYZ angles (R = Rz * Ry * Rx).
std::array<double, 3> quaternion_to_fixed_xyz(double qx, double qy, double qz, double qw);

inline constexpr double kDefaultSensorDelay = 0.030;

/// Shifts pose timestamps by -delay so wrench and pose share one timeline.
/// Pose samples that land before t = 0 are dropped.
Trial align_streams(const Trial& trial, double delay = kDefaultSensorDelay);

}  // namespace haptix

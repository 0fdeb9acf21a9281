#include "ecoplatoon/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json_util.hpp"

namespace ecoplatoon {

RoadClass ParseRoadClass(std::string_view name) {
  if (name == "major_arterial") return RoadClass::kMajorArterial;
  if (name == "collector") return RoadClass::kCollector;
  throw ConfigError("unknown road class '" + std::string(name) +
                    "' (expected major_arterial or collector)");
}

std::string_view RoadClassName(RoadClass kind) {
  return kind == RoadClass::kMajorArterial ? "major_arterial" : "collector";
}

SlopeProfile::SlopeProfile(std::vector<double> breakpoints, std::vector<double> grades)
    : breakpoints_(std::move(breakpoints)), grades_(std::move(grades)) {
  if (breakpoints_.size() < 2) {
    throw ConfigError("slope profile needs at least two breakpoints");
  }
  if (grades_.size() + 1 != breakpoints_.size()) {
    throw ConfigError("slope profile needs exactly one grade per segment");
  }
  if (breakpoints_.front() != 0.0) {
    throw ConfigError("slope profile must start at position 0");
  }
  for (std::size_t j = 0; j + 1 < breakpoints_.size(); ++j) {
    if (!(breakpoints_[j + 1] > breakpoints_[j]) || !std::isfinite(breakpoints_[j + 1])) {
      throw ConfigError("slope profile breakpoints must be finite and strictly increasing");
    }
  }
  for (double theta : grades_) {
    if (!std::isfinite(theta) || std::abs(theta) >= std::numbers::pi / 2) {
      throw ConfigError("slope profile grade angle must satisfy |theta| < pi/2");
    }
  }
}

SlopeProfile SlopeProfile::Flat(double length) {
  return SlopeProfile({0.0, length}, {0.0});
}

SlopeProfile SlopeProfile::FromPercentGrades(std::vector<double> breakpoints,
                                             const std::vector<double>& percent_grades) {
  std::vector<double> angles;
  angles.reserve(percent_grades.size());
  for (double pct : percent_grades) angles.push_back(std::atan(pct / 100.0));
  return SlopeProfile(std::move(breakpoints), std::move(angles));
}

std::size_t SlopeProfile::SegmentAt(double s) const {
  if (!(s >= 0.0 && s <= total_length())) {
    std::ostringstream msg;
    msg << "position " << s << " m is outside the route [0, " << total_length() << "]";
    throw DomainError(msg.str());
  }
  // Right-continuous: a breakpoint belongs to the segment that starts there.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), s);
  auto j = static_cast<std::size_t>(std::distance(breakpoints_.begin(), it));
  return std::min(j - 1, grades_.size() - 1);
}

double SlopeProfile::GradeAt(double s) const { return grades_[SegmentAt(s)]; }

double SlopeProfile::ElevationAt(double s) const {
  std::size_t seg = SegmentAt(s);
  double z = 0.0;
  for (std::size_t j = 0; j < seg; ++j) {
    z += std::tan(grades_[j]) * (breakpoints_[j + 1] - breakpoints_[j]);
  }
  return z + std::tan(grades_[seg]) * (s - breakpoints_[seg]);
}

SlopeProfile BuildPreset(RoadClass kind) {
  const double peak = kind == RoadClass::kMajorArterial ? 6.0 : 15.0;
  std::vector<double> breakpoints;
  std::vector<double> percent;
  for (int j = 0; j <= 8; ++j) breakpoints.push_back(100.0 * j);
  for (int j = 0; j < 8; ++j) percent.push_back(j % 2 == 0 ? peak : -peak);
  return SlopeProfile::FromPercentGrades(std::move(breakpoints), percent);
}

SlopeProfile ParseSlopeProfile(std::string_view json_text) {
  const nlohmann::json doc = detail::ParseJson(json_text, "slope profile");
  auto field = [&](const char* key) -> std::vector<double> {
    int line = detail::LineOfKey(json_text, key);
    auto where = [&] {
      return line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    };
    if (!doc.is_object() || !doc.contains(key)) {
      throw ConfigError("slope profile: missing field '" + std::string(key) + "'");
    }
    const auto& arr = doc.at(key);
    if (!arr.is_array()) {
      throw ConfigError("slope profile: " + where() + "'" + key + "' must be an array");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) {
        throw ConfigError("slope profile: " + where() + "'" + key + "'[" + std::to_string(i) +
                          "] is not a number");
      }
      out.push_back(arr[i].get<double>());
    }
    return out;
  };
  auto breakpoints = field("breakpoints_m");
  auto percent = field("percent_grades");
  try {
    return SlopeProfile::FromPercentGrades(std::move(breakpoints), percent);
  } catch (const ConfigError& e) {
    int line = detail::LineOfKey(json_text, "breakpoints_m");
    throw ConfigError("slope profile: line " + std::to_string(line) + ": " + e.what());
  }
}

SlopeProfile LoadSlopeProfile(const std::filesystem::path& path) {
  try {
    return ParseSlopeProfile(detail::ReadTextFile(path.string()));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<double> SampleGrades(const SlopeProfile& profile, double s0, double ds, int steps) {
  std::vector<double> out(static_cast<std::size_t>(std::max(steps, 0)));
  for (int k = 0; k < steps; ++k) {
    double s = std::min(s0 + k * ds, profile.total_length());
    out[static_cast<std::size_t>(k)] = profile.GradeAt(s);
  }
  return out;
}

}  // namespace ecoplatoon

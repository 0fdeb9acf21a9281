#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "ecoplatoon/common.hpp"

namespace ecoplatoon {

enum class RoadClass { kMajorArterial, kCollector };

RoadClass ParseRoadClass(std::string_view name);
std::string_view RoadClassName(RoadClass kind);

// Piecewise-constant road grade over [0, total_length]. Segment j covers
// [breakpoints[j], breakpoints[j+1]) and the last segment also owns the end
// point. Grades are angles in radians.
class SlopeProfile {
 public:
  SlopeProfile(std::vector<double> breakpoints, std::vector<double> grades);

  static SlopeProfile Flat(double length);
  // `percent_grades` are rise-over-run in percent (6 means tan θ = 0.06).
  static SlopeProfile FromPercentGrades(std::vector<double> breakpoints,
                                        const std::vector<double>& percent_grades);

  // Throws DomainError when s is outside [0, total_length].
  double GradeAt(double s) const;
  // Index of the segment containing s (same tie-breaking as GradeAt).
  std::size_t SegmentAt(double s) const;
  // Height above the start point, integral of tan θ.
  double ElevationAt(double s) const;

  double total_length() const { return breakpoints_.back(); }
  std::size_t num_segments() const { return grades_.size(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& grades() const { return grades_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> grades_;
};

// 800 m, eight 100 m segments alternating uphill/downhill at the class's peak
// grade (6% major arterial, 15% collector).
SlopeProfile BuildPreset(RoadClass kind);

// JSON: {"breakpoints_m": [...], "percent_grades": [...]}. Errors carry the
// line number of the offending token.
SlopeProfile ParseSlopeProfile(std::string_view json_text);
SlopeProfile LoadSlopeProfile(const std::filesystem::path& path);

// θ at s0 + k*ds for k in [0, steps). Positions past the end of the route are
// clamped to the last segment.
std::vector<double> SampleGrades(const SlopeProfile& profile, double s0, double ds, int steps);

}  // namespace ecoplatoon

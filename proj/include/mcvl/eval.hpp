#pragma once
// Trajectory scoring and reporting: per-frame translation/rotation errors,
// mean and median aggregation, a smoothness metric (mean consecutive
// estimate jump), and side-by-side comparison of named reports.

#include "mcvl/geometry.hpp"

#include <string>
#include <vector>

namespace mcvl::eval {

struct ErrorReport {
  std::vector<double> translation_errors;  // meters, per frame
  std::vector<double> rotation_errors;     // radians, per frame
  double mean_translation = 0.0;
  double median_translation = 0.0;
  double mean_rotation = 0.0;
  double median_rotation = 0.0;
  double smoothness = 0.0;  // mean consecutive-estimate jump, meters
};

// Lower-median convention for even counts.
double median(std::vector<double> values);

ErrorReport score(const std::vector<geometry::Pose6D>& est,
                  const std::vector<geometry::Pose6D>& gt);

struct NamedReport {
  std::string name;
  ErrorReport report;
};

// Aligned text table, Mean/Median rotation and translation plus smoothness;
// the best entry per column is flagged with '*' (no flag on ties).
std::string compare(const std::vector<NamedReport>& reports);

std::string report_csv(const ErrorReport& r);

// Ground truth (green) and estimate (red) position traces as an SVG overlay.
std::string trajectory_svg(const std::vector<geometry::Pose6D>& gt,
                           const std::vector<geometry::Pose6D>& est);

}  // namespace mcvl::eval

#include "mcvl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mcvl::eval {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];  // lower median for even counts
}

ErrorReport score(const std::vector<geometry::Pose6D>& est,
                  const std::vector<geometry::Pose6D>& gt) {
  if (est.size() != gt.size()) {
    throw std::invalid_argument("score: trajectory length mismatch");
  }
  if (est.empty()) throw std::invalid_argument("score: empty trajectories");

  ErrorReport r;
  r.translation_errors.reserve(est.size());
  r.rotation_errors.reserve(est.size());
  double tsum = 0.0, rsum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double te = geometry::translation_error(est[i].position, gt[i].position);
    const double re = geometry::rotation_error(est[i].orientation, gt[i].orientation);
    r.translation_errors.push_back(te);
    r.rotation_errors.push_back(re);
    tsum += te;
    rsum += re;
  }
  r.mean_translation = tsum / static_cast<double>(est.size());
  r.mean_rotation = rsum / static_cast<double>(est.size());
  r.median_translation = median(r.translation_errors);
  r.median_rotation = median(r.rotation_errors);

  double jump = 0.0;
  for (std::size_t i = 1; i < est.size(); ++i) {
    jump += (est[i].position - est[i - 1].position).norm();
  }
  r.smoothness = est.size() > 1 ? jump / static_cast<double>(est.size() - 1) : 0.0;
  return r;
}

namespace {

struct Column {
  const char* header;
  double (*get)(const ErrorReport&);
};

const Column kColumns[] = {
    {"mean_t[m]", [](const ErrorReport& r) { return r.mean_translation; }},
    {"med_t[m]", [](const ErrorReport& r) { return r.median_translation; }},
    {"mean_r[rad]", [](const ErrorReport& r) { return r.mean_rotation; }},
    {"med_r[rad]", [](const ErrorReport& r) { return r.median_rotation; }},
    {"smooth[m]", [](const ErrorReport& r) { return r.smoothness; }},
};

}  // namespace

std::string compare(const std::vector<NamedReport>& reports) {
  if (reports.size() < 2) {
    throw std::invalid_argument("compare: need at least two reports");
  }
  for (const auto& r : reports) {
    if (r.name.empty()) throw std::invalid_argument("compare: empty report name");
  }
  std::ostringstream os;
  os << std::left << std::setw(16) << "name";
  for (const auto& col : kColumns) os << std::right << std::setw(13) << col.header;
  os << '\n';
  for (const auto& nr : reports) {
    os << std::left << std::setw(16) << nr.name;
    for (const auto& col : kColumns) {
      const double v = col.get(nr.report);
      double best = std::numeric_limits<double>::infinity();
      int best_count = 0;
      for (const auto& other : reports) {
        const double ov = col.get(other.report);
        if (ov < best) {
          best = ov;
          best_count = 1;
        } else if (ov == best) {
          ++best_count;
        }
      }
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(4) << v;
      if (v == best && best_count == 1) cell << '*';
      os << std::right << std::setw(13) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

std::string report_csv(const ErrorReport& r) {
  std::ostringstream os;
  os << "metric,value\n";
  os << std::setprecision(17);
  os << "mean_translation_m," << r.mean_translation << '\n';
  os << "median_translation_m," << r.median_translation << '\n';
  os << "mean_rotation_rad," << r.mean_rotation << '\n';
  os << "median_rotation_rad," << r.median_rotation << '\n';
  os << "smoothness_m," << r.smoothness << '\n';
  os << "frame,translation_error_m,rotation_error_rad\n";
  for (std::size_t i = 0; i < r.translation_errors.size(); ++i) {
    os << i << ',' << r.translation_errors[i] << ',' << r.rotation_errors[i] << '\n';
  }
  return os.str();
}

std::string trajectory_svg(const std::vector<geometry::Pose6D>& gt,
                           const std::vector<geometry::Pose6D>& est) {
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const auto* traj : {&gt, &est}) {
    for (const auto& p : *traj) {
      min_x = std::min(min_x, p.position.x());
      max_x = std::max(max_x, p.position.x());
      min_y = std::min(min_y, p.position.y());
      max_y = std::max(max_y, p.position.y());
    }
  }
  constexpr double kSize = 800.0, kMargin = 40.0;
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  const double scale = (kSize - 2 * kMargin) / span;

  auto polyline = [&](const std::vector<geometry::Pose6D>& traj, const char* color) {
    std::ostringstream os;
    os << "  <polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\" points=\"";
    os << std::fixed << std::setprecision(2);
    for (const auto& p : traj) {
      const double x = kMargin + (p.position.x() - min_x) * scale;
      const double y = kSize - kMargin - (p.position.y() - min_y) * scale;
      os << x << ',' << y << ' ';
    }
    os << "\"/>\n";
    return os.str();
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
     << "\" height=\"" << kSize << "\">\n";
  os << polyline(gt, "green");
  os << polyline(est, "red");
  os << "</svg>\n";
  return os.str();
}

}  // namespace mcvl::eval

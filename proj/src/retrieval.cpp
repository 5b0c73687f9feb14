#include "mcvl/retrieval.hpp"

#include "mcvl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcvl::retrieval {

std::vector<Neighbor> knn(const MapDatabase& db, const encoder::GlobalDescriptor& q,
                          std::size_t r) {
  if (db.entries.empty()) throw EmptyDatabase("knn: empty map database");
  r = std::min(r, db.entries.size());
  std::vector<Neighbor> all(db.entries.size());
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    const auto& d = db.entries[i].descriptor;
    all[i] = {i, std::sqrt(static_cast<double>(
                     kernels::l2sq(q.values.data(), d.data(), d.size())))};
  }
  auto cmp = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(r),
                    all.end(), cmp);
  all.resize(r);
  return all;
}

namespace {

geometry::Vec3 window_mean(const std::vector<geometry::Vec3>& points,
                           const geometry::Vec3& center, double bandwidth) {
  geometry::Vec3 sum = geometry::Vec3::Zero();
  std::size_t count = 0;
  for (const auto& p : points) {
    if ((p - center).norm() <= bandwidth) {
      sum += p;
      ++count;
    }
  }
  return count ? geometry::Vec3(sum / static_cast<double>(count)) : center;
}

}  // namespace

std::vector<Cluster> mean_shift(const std::vector<geometry::Vec3>& points,
                                double bandwidth) {
  std::vector<Cluster> clusters;
  if (points.empty()) return clusters;
  constexpr int kMaxIters = 200;
  constexpr double kConvergence = 1e-6;

  std::vector<geometry::Vec3> modes;
  modes.reserve(points.size());
  for (const auto& p : points) {
    geometry::Vec3 m = p;
    for (int it = 0; it < kMaxIters; ++it) {
      const geometry::Vec3 next = window_mean(points, m, bandwidth);
      const double shift = (next - m).norm();
      m = next;
      if (shift < kConvergence) break;
    }
    modes.push_back(m);
  }
  // Merge modes closer than bandwidth/2, first-come order.
  for (const auto& m : modes) {
    bool merged = false;
    for (auto& c : clusters) {
      if ((c.mode - m).norm() < bandwidth / 2.0) {
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back({m, {}});
  }
  // Assign every point to its nearest surviving mode.
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double d = (points[i] - clusters[c].mode).norm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    clusters[best].members.push_back(i);
  }
  // Drop modes that attracted no points (possible after merging).
  std::erase_if(clusters, [](const Cluster& c) { return c.members.empty(); });
  return clusters;
}

Measurement measure(const MapDatabase& db, const encoder::GlobalDescriptor& q,
                    const RetrievalConfig& cfg) {
  const std::vector<Neighbor> hits = knn(db, q, cfg.top_r);

  std::vector<geometry::Vec3> translations;
  translations.reserve(hits.size());
  for (const auto& h : hits) {
    translations.push_back(db.entries[h.index].pose.position);
  }
  const std::vector<Cluster> clusters = mean_shift(translations, cfg.meanshift_bandwidth);

  auto mean_retrieval_distance = [&](const Cluster& c) {
    double s = 0.0;
    for (std::size_t m : c.members) s += hits[m].distance;
    return s / static_cast<double>(c.members.size());
  };

  std::size_t win = 0;
  for (std::size_t c = 1; c < clusters.size(); ++c) {
    if (clusters[c].members.size() > clusters[win].members.size()) {
      win = c;
    } else if (clusters[c].members.size() == clusters[win].members.size() &&
               mean_retrieval_distance(clusters[c]) < mean_retrieval_distance(clusters[win])) {
      win = c;
    }
  }
  const Cluster& winner = clusters[win];

  geometry::Vec3 mean_pos = geometry::Vec3::Zero();
  std::vector<geometry::EulerTriple> rotations;
  rotations.reserve(winner.members.size());
  for (std::size_t m : winner.members) {
    const auto& pose = db.entries[hits[m].index].pose;
    mean_pos += pose.position;
    rotations.push_back(pose.orientation);
  }
  mean_pos /= static_cast<double>(winner.members.size());

  Measurement z;
  z.pose.position = mean_pos;
  z.pose.orientation = geometry::mean_rotation(rotations);
  z.support = winner.members.size();
  z.low_confidence = z.support < 3;
  z.distances.reserve(hits.size());
  for (const auto& h : hits) z.distances.push_back(h.distance);
  return z;
}

}  // namespace mcvl::retrieval

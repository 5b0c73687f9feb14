#pragma once
// Back half of the observation encoder: map database, exact top-R nearest
// neighbor search, mean-shift over retrieved translations, and aggregation
// of the winning cluster into a single noisy pose measurement.

#include "mcvl/encoder.hpp"
#include "mcvl/geometry.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcvl::retrieval {

struct MapEntry {
  std::vector<float> descriptor;
  geometry::Pose6D pose;
  std::uint32_t sequence_id = 0;
  std::uint32_t frame_id = 0;
};

struct MapDatabase {
  std::vector<MapEntry> entries;
  std::uint64_t codebook_hash = 0;
  std::size_t descriptor_dim() const {
    return entries.empty() ? 0 : entries[0].descriptor.size();
  }
};

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;  // L2
};

struct Cluster {
  geometry::Vec3 mode;
  std::vector<std::size_t> members;  // indices into the input point list
};

struct Measurement {
  geometry::Pose6D pose;
  std::size_t support = 0;  // winning-cluster size, in [1, R]
  std::vector<double> distances;  // retrieved L2 distances, ascending
  bool low_confidence = false;    // support < 3
};

struct EmptyDatabase : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RetrievalConfig {
  std::size_t top_r = 20;
  double meanshift_bandwidth = 7.5;  // meters
};

// Exact L2 kNN, ascending distance, ties by lower entry index. R larger
// than the database is clamped.
std::vector<Neighbor> knn(const MapDatabase& db, const encoder::GlobalDescriptor& q,
                          std::size_t r);

// Flat-kernel mean shift; modes closer than bandwidth/2 are merged, every
// point is assigned to the nearest surviving mode. Deterministic in input
// order.
std::vector<Cluster> mean_shift(const std::vector<geometry::Vec3>& points,
                                double bandwidth);

// Retrieval -> mean shift -> largest cluster -> mean translation and
// rotation. Largest-cluster ties break to the smaller mean retrieval
// distance, then the lower cluster index.
Measurement measure(const MapDatabase& db, const encoder::GlobalDescriptor& q,
                    const RetrievalConfig& cfg);

}  // namespace mcvl::retrieval

#pragma once
// File formats shared repo-wide. All binary formats are little-endian with
// an 8-byte magic; the trajectory format is plain text, one record per
// line: `t x y z roll pitch yaw`, '#' starts a comment.

#include "mcvl/encoder.hpp"
#include "mcvl/features.hpp"
#include "mcvl/filter.hpp"
#include "mcvl/retrieval.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mcvl::io {

struct Trajectory {
  std::vector<double> times;
  std::vector<geometry::Pose6D> poses;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t file_hash(const std::filesystem::path& path);

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const features::GrayImage& img);
features::GrayImage read_pgm(const std::filesystem::path& path);

void write_descriptor_set(const std::filesystem::path& path,
                          const features::DescriptorSet& ds);
features::DescriptorSet read_descriptor_set(const std::filesystem::path& path);

void write_codebook(const std::filesystem::path& path, const encoder::Codebook& cb);
encoder::Codebook read_codebook(const std::filesystem::path& path);

void write_database(const std::filesystem::path& path, const retrieval::MapDatabase& db);
retrieval::MapDatabase read_database(const std::filesystem::path& path);

// One JSON object per filter step.
std::string step_record_json(const filter::StepRecord& rec);

}  // namespace mcvl::io

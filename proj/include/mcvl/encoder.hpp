#pragma once
// Global image descriptor pipeline: k-means vocabulary, VLAD embedding with
// sum pooling, PCA projection + whitening + L2 normalization.

#include "mcvl/features.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace mcvl::encoder {

struct Vocabulary {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<float> centers;  // k x dim, row-major

  const float* center(std::size_t j) const { return centers.data() + j * dim; }
};

struct PcaModel {
  Eigen::VectorXd mean;    // D
  Eigen::MatrixXd basis;   // D x p, orthonormal columns
  Eigen::VectorXd scale;   // p, whitening divisors sqrt(eigenvalue) + eps

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(scale.size()); }
};

struct GlobalDescriptor {
  std::vector<float> values;  // unit L2 norm, or all-zero when degenerate
  bool degenerate = false;
};

struct Codebook {
  Vocabulary vocabulary;
  PcaModel pca;
  features::FeatureConfig feature_config;
};

// Lloyd's k-means with k-means++ seeding. Stops after max_iters or when the
// relative inertia change drops below 1e-4; empty clusters are re-seeded
// from the point farthest from its center. Throws if the pool has fewer
// than k points.
Vocabulary train_vocabulary(const std::vector<float>& pool, std::size_t count,
                            std::size_t dim, std::size_t k, std::uint64_t seed,
                            int max_iters = 100);

// Sum of per-descriptor residual embeddings; block j accumulates
// (x_i - c_j) over descriptors whose nearest word is j (ties to the lowest
// word index). Output length K*d.
std::vector<float> embed_vlad(const features::DescriptorSet& ds,
                              const Vocabulary& vocab);

// Mean-centered PCA with whitening. p is clamped to min(p, D, n-1); the
// clamp is reported through the returned model's output_dim. Throws when
// fewer than 2 samples are given.
PcaModel train_pca(const std::vector<std::vector<float>>& samples,
                   std::size_t p);

GlobalDescriptor finalize(const std::vector<float>& raw, const PcaModel& pca);

// Full pipeline for one image: dense extraction, RootSIFT, VLAD.
std::vector<float> raw_vlad(const features::GrayImage& img, const Codebook& cb);
GlobalDescriptor encode(const features::GrayImage& img, const Codebook& cb);

}  // namespace mcvl::encoder

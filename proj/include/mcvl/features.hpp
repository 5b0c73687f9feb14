#pragma once
// Dense local-descriptor extraction: upright SIFT-style descriptors
// (4x4 spatial cells x 8 orientation bins) computed over a regular grid at
// several region widths, followed by RootSIFT normalization.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mcvl::features {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // row-major, intensities in [0,1]

  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct FeatureConfig {
  int spacing = 2;
  std::vector<int> region_widths = {16, 24, 32, 40};
  int cells = 4;             // 4x4 spatial layout
  int orientation_bins = 8;  // descriptor dim = cells^2 * orientation_bins
};

struct Keypoint {
  float x = 0.0f;  // region center, pixels
  float y = 0.0f;
  float scale = 0.0f;  // region width
};

struct DescriptorSet {
  std::size_t dim = 128;
  std::vector<float> data;  // M x dim, row-major
  std::vector<Keypoint> keypoints;

  std::size_t count() const { return keypoints.size(); }
  const float* row(std::size_t i) const { return data.data() + i * dim; }
};

struct ImageTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Number of grid positions per axis for one region width; M is the sum of
// count_x * count_y over all scales.
std::size_t grid_count(int image_extent, int region_width, int spacing);
std::size_t descriptor_count(int width, int height, const FeatureConfig& cfg);

// Raw (unnormalized) dense descriptors, scale-major then row-major order.
// Flat patches yield all-zero rows; those are kept so M stays a pure
// function of the geometry. Throws ImageTooSmall if no region fits.
DescriptorSet extract_dense(const GrayImage& img, const FeatureConfig& cfg);

// L1-normalize then element-wise square root. Nonzero rows come out with
// unit L2 norm; all-zero rows pass through. Throws on negative entries.
DescriptorSet root_sift(const DescriptorSet& ds);
void root_sift_inplace(DescriptorSet& ds);

// Row transform behind root_sift; precision follows the element type.
template <typename T>
void root_sift_row(T* row, std::size_t n) {
  T l1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (row[i] < 0) {
      throw std::invalid_argument("root_sift: negative descriptor entry");
    }
    l1 += row[i];
  }
  if (l1 == 0) return;  // flat patch, keep the zero row
  for (std::size_t i = 0; i < n; ++i) {
    row[i] = std::sqrt(row[i] / l1);
  }
}

// RGB -> luma conversion used at CLI boundaries.
inline float luma(float r, float g, float b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

}  // namespace mcvl::features

#include "mcvl/kernels.hpp"

#if defined(MCVL_KERNELS_HAVE_NEON)

#include <arm_neon.h>

#include <limits>

namespace mcvl::kernels::neon {

float dot(const float* a, const float* b, std::size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
  }
  float sum = vaddvq_f32(acc);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

float l2sq(const float* a, const float* b, std::size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t d = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
    acc = vfmaq_f32(acc, d, d);
  }
  float sum = vaddvq_f32(acc);
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::size_t nearest_center(const float* x, const float* centers,
                           std::size_t k, std::size_t d) {
  std::size_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const float dist = l2sq(x, centers + j * d, d);
    if (dist < best_d) {
      best_d = dist;
      best = j;
    }
  }
  return best;
}

}  // namespace mcvl::kernels::neon

#endif  // MCVL_KERNELS_HAVE_NEON

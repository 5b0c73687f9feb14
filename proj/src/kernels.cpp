#include "mcvl/kernels.hpp"

#include <limits>

namespace mcvl::kernels {

namespace scalar {

float dot(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

float l2sq(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    const float d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
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

}  // namespace scalar

namespace {

struct Dispatch {
  Backend backend;
  float (*dot)(const float*, const float*, std::size_t);
  float (*l2sq)(const float*, const float*, std::size_t);
  std::size_t (*nearest_center)(const float*, const float*, std::size_t,
                                std::size_t);
};

constexpr Dispatch kScalar{Backend::Scalar, scalar::dot, scalar::l2sq,
                           scalar::nearest_center};

Dispatch detect() {
#if defined(MCVL_KERNELS_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return {Backend::Avx2, avx2::dot, avx2::l2sq, avx2::nearest_center};
  }
#endif
#if defined(MCVL_KERNELS_HAVE_NEON)
  return {Backend::Neon, neon::dot, neon::l2sq, neon::nearest_center};
#endif
  return kScalar;
}

Dispatch g_dispatch = detect();

}  // namespace

Backend active_backend() { return g_dispatch.backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

bool force_backend(Backend b) {
  switch (b) {
    case Backend::Scalar:
      g_dispatch = kScalar;
      return true;
    case Backend::Avx2:
#if defined(MCVL_KERNELS_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        g_dispatch = {Backend::Avx2, avx2::dot, avx2::l2sq,
                      avx2::nearest_center};
        return true;
      }
#endif
      return false;
    case Backend::Neon:
#if defined(MCVL_KERNELS_HAVE_NEON)
      g_dispatch = {Backend::Neon, neon::dot, neon::l2sq,
                    neon::nearest_center};
      return true;
#else
      return false;
#endif
  }
  return false;
}

float dot(const float* a, const float* b, std::size_t n) {
  return g_dispatch.dot(a, b, n);
}

float l2sq(const float* a, const float* b, std::size_t n) {
  return g_dispatch.l2sq(a, b, n);
}

std::size_t nearest_center(const float* x, const float* centers,
                           std::size_t k, std::size_t d) {
  return g_dispatch.nearest_center(x, centers, k, d);
}

}  // namespace mcvl::kernels

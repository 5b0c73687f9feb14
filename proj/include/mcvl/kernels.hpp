#pragma once
// Float inner-loop kernels with scalar reference implementations and SIMD
// variants selected at runtime. Every SIMD variant must agree with the
// scalar reference within floating-point reassociation tolerance; the
// equivalence tests in tests/test_kernels.cpp enforce this.

#include <cstddef>

namespace mcvl::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Backend chosen at startup from CPU capabilities.
Backend active_backend();
const char* backend_name(Backend b);

// Overrides the dispatched backend (tests only). Selecting an unsupported
// backend is a no-op and returns false.
bool force_backend(Backend b);

float dot(const float* a, const float* b, std::size_t n);
float l2sq(const float* a, const float* b, std::size_t n);

// Index of the row of `centers` (k rows, d columns, row-major) with the
// smallest squared L2 distance to x. Ties resolved to the lowest index.
std::size_t nearest_center(const float* x, const float* centers,
                           std::size_t k, std::size_t d);

// Reference implementations, always available.
namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
float l2sq(const float* a, const float* b, std::size_t n);
std::size_t nearest_center(const float* x, const float* centers,
                           std::size_t k, std::size_t d);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MCVL_KERNELS_HAVE_AVX2 1
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
float l2sq(const float* a, const float* b, std::size_t n);
std::size_t nearest_center(const float* x, const float* centers,
                           std::size_t k, std::size_t d);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define MCVL_KERNELS_HAVE_NEON 1
namespace neon {
float dot(const float* a, const float* b, std::size_t n);
float l2sq(const float* a, const float* b, std::size_t n);
std::size_t nearest_center(const float* x, const float* centers,
                           std::size_t k, std::size_t d);
}  // namespace neon
#endif

}  // namespace mcvl::kernels

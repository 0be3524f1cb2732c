// Compiled with -mavx2 -mfma. Only entered after avx2_available() is true.
// Keep this unit free of std/Eigen headers so no inline library code gets
// emitted with AVX2 encodings and merged into the scalar build.

#include <cstddef>

#if defined(FDRELAY_HAVE_AVX2_TU) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace fdrelay::kernels::avx2 {

namespace {

// y[0..n) += (ar + j ai) * x[0..n), two complex values per register.
inline void caxpy(std::size_t n, double ar, double ai, const double* x, double* y) {
  const __m256d vr = _mm256_set1_pd(ar);
  const __m256d vi = _mm256_set1_pd(ai);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(x + 2 * i);                 // [xr0 xi0 xr1 xi1]
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);              // [xi0 xr0 xi1 xr1]
    const __m256d prod = _mm256_fmaddsub_pd(xv, vr, _mm256_mul_pd(xs, vi));  // [xr ar - xi ai, xi ar + xr ai]
    _mm256_storeu_pd(y + 2 * i, _mm256_add_pd(_mm256_loadu_pd(y + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double xr = x[2 * i];
    const double xi = x[2 * i + 1];
    y[2 * i] += ar * xr - ai * xi;
    y[2 * i + 1] += ar * xi + ai * xr;
  }
}

}  // namespace

void gram_accumulate(const double* samples, std::size_t rows, std::size_t count, double* out) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* x = samples + 2 * rows * k;
    for (std::size_t j = 0; j < rows; ++j) caxpy(rows, x[2 * j], -x[2 * j + 1], x, out + 2 * rows * j);
  }
}

void gemm_accumulate(const double* a, std::size_t m, std::size_t n, const double* x, std::size_t count,
                     double* y) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* xk = x + 2 * n * k;
    double* yk = y + 2 * m * k;
    for (std::size_t j = 0; j < n; ++j) caxpy(m, xk[2 * j], xk[2 * j + 1], a + 2 * m * j, yk);
  }
}

}  // namespace fdrelay::kernels::avx2

#else

// Non-x86 builds: the dispatcher never selects these.
namespace fdrelay::kernels::avx2 {
void gram_accumulate(const double*, std::size_t, std::size_t, double*) {}
void gemm_accumulate(const double*, std::size_t, std::size_t, const double*, std::size_t, double*) {}
}  // namespace fdrelay::kernels::avx2

#endif

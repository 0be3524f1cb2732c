#include <cstddef>

// Reference kernels. Interleaved complex storage: element i is (p[2i], p[2i+1]).

namespace fdrelay::kernels::scalar {

namespace {

// y[0..n) += (ar + j ai) * x[0..n)
inline void caxpy(std::size_t n, double ar, double ai, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
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
    for (std::size_t j = 0; j < rows; ++j) {
      // column j of x x^H is x * conj(x_j)
      caxpy(rows, x[2 * j], -x[2 * j + 1], x, out + 2 * rows * j);
    }
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

}  // namespace fdrelay::kernels::scalar

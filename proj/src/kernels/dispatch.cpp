#include <atomic>

#include "fdrelay/errors.hpp"
#include "fdrelay/kernels.hpp"

namespace fdrelay::kernels {

namespace {

bool detect_avx2() {
#if defined(FDRELAY_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect_avx2() ? Isa::kAvx2 : Isa::kScalar};
  return isa;
}

const double* raw(const cdouble* p) { return reinterpret_cast<const double*>(p); }
double* raw(cdouble* p) { return reinterpret_cast<double*>(p); }

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool avx2_available() {
  static const bool ok = detect_avx2();
  return ok;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa set_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2_available()) isa = Isa::kScalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

void gram_accumulate(const cdouble* samples, std::size_t rows, std::size_t count, cdouble* out) {
  if (active_isa() == Isa::kAvx2) {
    avx2::gram_accumulate(raw(samples), rows, count, raw(out));
  } else {
    scalar::gram_accumulate(raw(samples), rows, count, raw(out));
  }
}

void gemm_accumulate(const cdouble* a, std::size_t m, std::size_t n, const cdouble* x, std::size_t count,
                     cdouble* y) {
  if (active_isa() == Isa::kAvx2) {
    avx2::gemm_accumulate(raw(a), m, n, raw(x), count, raw(y));
  } else {
    scalar::gemm_accumulate(raw(a), m, n, raw(x), count, raw(y));
  }
}

CMat gram(const CMat& samples) {
  CMat out = CMat::Zero(samples.rows(), samples.rows());
  gram_accumulate(samples.data(), static_cast<std::size_t>(samples.rows()), static_cast<std::size_t>(samples.cols()),
                  out.data());
  return out;
}

void gemm_accumulate(const CMat& a, const CMat& x, CMat& y) {
  if (a.cols() != x.rows() || y.rows() != a.rows() || y.cols() != x.cols()) {
    throw DimensionError("gemm_accumulate: shape mismatch");
  }
  gemm_accumulate(a.data(), static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()), x.data(),
                  static_cast<std::size_t>(x.cols()), y.data());
}

}  // namespace fdrelay::kernels

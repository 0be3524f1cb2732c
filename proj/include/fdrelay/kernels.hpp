#pragma once

#include <cstddef>
#include <string_view>

#include "fdrelay/types.hpp"

// Data-parallel inner loops of the link simulator. Every kernel has a
// portable scalar reference and, on x86-64, an AVX2/FMA variant selected at
// runtime from CPUID. Matrices are column-major, complex values interleaved
// (re, im), matching Eigen's storage of MatrixXcd.

namespace fdrelay::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

/// True when the CPU supports AVX2 and FMA and the AVX2 variant was compiled in.
bool avx2_available();

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// Pins dispatch to a given ISA (tests, benchmarks). Requesting kAvx2 on a
/// machine without it falls back to scalar; returns the ISA now in effect.
Isa set_isa(Isa isa);

/// out (rows x rows) += sum_k x_k x_k^H, where x_k is column k of the
/// rows x count matrix `samples`.
void gram_accumulate(const cdouble* samples, std::size_t rows, std::size_t count, cdouble* out);

/// y (m x count) += a (m x n) * x (n x count).
void gemm_accumulate(const cdouble* a, std::size_t m, std::size_t n, const cdouble* x, std::size_t count,
                     cdouble* y);

/// Convenience wrappers over Eigen storage.
CMat gram(const CMat& samples);
void gemm_accumulate(const CMat& a, const CMat& x, CMat& y);

namespace scalar {
void gram_accumulate(const double* samples, std::size_t rows, std::size_t count, double* out);
void gemm_accumulate(const double* a, std::size_t m, std::size_t n, const double* x, std::size_t count,
                     double* y);
}  // namespace scalar

namespace avx2 {
void gram_accumulate(const double* samples, std::size_t rows, std::size_t count, double* out);
void gemm_accumulate(const double* a, std::size_t m, std::size_t n, const double* x, std::size_t count,
                     double* y);
}  // namespace avx2

}  // namespace fdrelay::kernels

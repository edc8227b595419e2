#pragma once

// Weighted complex reductions over quadrature/array nodes.
//
// Every continuous integral in the model becomes one of these sums over a
// shared node set.  Each kernel has a portable scalar reference and an AVX2
// variant; the variant is picked once at startup from CPUID and can be
// forced with CAPA_SIMD=scalar|avx2 for testing.

#include <complex>
#include <span>
#include <string_view>

namespace capa::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

/// Sum_n w[n] * a[n] * conj(b[n]).
cplx weighted_inner(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w);

/// Sum_n w[n] * a[n] * b[n].
cplx weighted_bilinear(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w);

/// Sum_n w[n] * |a[n]|^2.
double weighted_norm2(std::span<const cplx> a, std::span<const double> w);

/// y[n] += alpha * conj(x[n]).
void axpy_conj(cplx alpha, std::span<const cplx> x, std::span<cplx> y);

Isa active_isa();
std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

/// Overrides the runtime choice; throws if the ISA is not available here.
void force_isa(Isa isa);

// Direct entry points, used by the equivalence tests.
namespace scalar {
cplx weighted_inner(const cplx* a, const cplx* b, const double* w, std::size_t n);
cplx weighted_bilinear(const cplx* a, const cplx* b, const double* w, std::size_t n);
double weighted_norm2(const cplx* a, const double* w, std::size_t n);
void axpy_conj(cplx alpha, const cplx* x, cplx* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled();
cplx weighted_inner(const cplx* a, const cplx* b, const double* w, std::size_t n);
cplx weighted_bilinear(const cplx* a, const cplx* b, const double* w, std::size_t n);
double weighted_norm2(const cplx* a, const double* w, std::size_t n);
void axpy_conj(cplx alpha, const cplx* x, cplx* y, std::size_t n);
}  // namespace avx2

}  // namespace capa::simd

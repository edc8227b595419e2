// Built with -mavx2 -mfma on x86-64; everything else sees the stubs below.
#include "capa/simd/kernels.hpp"

#if defined(CAPA_BUILD_AVX2) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace capa::simd::avx2 {

namespace {

// [w0 w0 w1 w1]
inline __m256d load_weight_pair(const double* w) {
  const __m128d pair = _mm_loadu_pd(w);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(pair), 0b01010000);
}

inline double hsum_even(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return t[0] + t[2];
}

inline double hsum_odd(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return t[1] + t[3];
}

}  // namespace

bool compiled() { return true; }

cplx weighted_inner(const cplx* a, const cplx* b, const double* w, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  __m256d acc_direct = _mm256_setzero_pd();  // [ar*br, ai*bi]
  __m256d acc_cross = _mm256_setzero_pd();   // [ar*bi, ai*br]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d wv = load_weight_pair(w + i);
    const __m256d av = _mm256_mul_pd(wv, _mm256_loadu_pd(pa + 2 * i));
    const __m256d bv = _mm256_loadu_pd(pb + 2 * i);
    acc_direct = _mm256_fmadd_pd(av, bv, acc_direct);
    acc_cross = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0b0101), acc_cross);
  }
  double re = hsum_even(acc_direct) + hsum_odd(acc_direct);
  double im = hsum_odd(acc_cross) - hsum_even(acc_cross);
  if (i < n) {
    const cplx tail = scalar::weighted_inner(a + i, b + i, w + i, n - i);
    re += tail.real();
    im += tail.imag();
  }
  return {re, im};
}

cplx weighted_bilinear(const cplx* a, const cplx* b, const double* w, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  __m256d acc_direct = _mm256_setzero_pd();
  __m256d acc_cross = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d wv = load_weight_pair(w + i);
    const __m256d av = _mm256_mul_pd(wv, _mm256_loadu_pd(pa + 2 * i));
    const __m256d bv = _mm256_loadu_pd(pb + 2 * i);
    acc_direct = _mm256_fmadd_pd(av, bv, acc_direct);
    acc_cross = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0b0101), acc_cross);
  }
  double re = hsum_even(acc_direct) - hsum_odd(acc_direct);
  double im = hsum_even(acc_cross) + hsum_odd(acc_cross);
  if (i < n) {
    const cplx tail = scalar::weighted_bilinear(a + i, b + i, w + i, n - i);
    re += tail.real();
    im += tail.imag();
  }
  return {re, im};
}

double weighted_norm2(const cplx* a, const double* w, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d wv = load_weight_pair(w + i);
    const __m256d av = _mm256_loadu_pd(pa + 2 * i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(wv, av), av, acc);
  }
  double s = hsum_even(acc) + hsum_odd(acc);
  if (i < n) s += scalar::weighted_norm2(a + i, w + i, n - i);
  return s;
}

void axpy_conj(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const auto* px = reinterpret_cast<const double*>(x);
  auto* py = reinterpret_cast<double*>(y);
  const double p = alpha.real(), q = alpha.imag();
  const __m256d pv = _mm256_setr_pd(p, -p, p, -p);
  const __m256d qv = _mm256_set1_pd(q);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(px + 2 * i);
    __m256d yv = _mm256_loadu_pd(py + 2 * i);
    yv = _mm256_fmadd_pd(pv, xv, yv);
    yv = _mm256_fmadd_pd(qv, _mm256_permute_pd(xv, 0b0101), yv);
    _mm256_storeu_pd(py + 2 * i, yv);
  }
  if (i < n) scalar::axpy_conj(alpha, x + i, y + i, n - i);
}

}  // namespace capa::simd::avx2

#else

#include <stdexcept>

namespace capa::simd::avx2 {

bool compiled() { return false; }

namespace {
[[noreturn]] void unavailable() { throw std::logic_error("AVX2 kernels not compiled in"); }
}  // namespace

cplx weighted_inner(const cplx*, const cplx*, const double*, std::size_t) { unavailable(); }
cplx weighted_bilinear(const cplx*, const cplx*, const double*, std::size_t) { unavailable(); }
double weighted_norm2(const cplx*, const double*, std::size_t) { unavailable(); }
void axpy_conj(cplx, const cplx*, cplx*, std::size_t) { unavailable(); }

}  // namespace capa::simd::avx2

#endif

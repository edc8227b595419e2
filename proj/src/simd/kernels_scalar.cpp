#include "capa/simd/kernels.hpp"

namespace capa::simd::scalar {

cplx weighted_inner(const cplx* a, const cplx* b, const double* w, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += w[i] * (ar * br + ai * bi);
    im += w[i] * (ai * br - ar * bi);
  }
  return {re, im};
}

cplx weighted_bilinear(const cplx* a, const cplx* b, const double* w, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += w[i] * (ar * br - ai * bi);
    im += w[i] * (ai * br + ar * bi);
  }
  return {re, im};
}

double weighted_norm2(const cplx* a, const double* w, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::norm(a[i]);
  return s;
}

void axpy_conj(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * std::conj(x[i]);
}

}  // namespace capa::simd::scalar

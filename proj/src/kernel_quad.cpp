#include "kernel_quad.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "capa/errors.hpp"

namespace capa::detail {

namespace {

template <class T>
struct wc {
  T re = 0, im = 0;
};

template <class T>
inline wc<T> operator+(wc<T> a, wc<T> b) { return {a.re + b.re, a.im + b.im}; }
template <class T>
inline wc<T> operator-(wc<T> a, wc<T> b) { return {a.re - b.re, a.im - b.im}; }
template <class T>
inline wc<T> operator*(wc<T> a, wc<T> b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
template <class T>
inline wc<T> operator*(T s, wc<T> a) { return {s * a.re, s * a.im}; }
template <class T>
inline wc<T> inverse(wc<T> a) {
  const T d = a.re * a.re + a.im * a.im;
  return {a.re / d, -a.im / d};
}
template <class T>
inline T magnitude1(wc<T> a) { return (a.re < 0 ? -a.re : a.re) + (a.im < 0 ? -a.im : a.im); }
template <class T>
inline wc<T> widen(cplx z) { return {static_cast<T>(z.real()), static_cast<T>(z.imag())}; }
template <class T>
inline cplx narrow(wc<T> z) { return {static_cast<double>(z.re), static_cast<double>(z.im)}; }

template <class T>
KernelSolution solve(const CMatrix& q, const Eigen::VectorXd& p, const CVector& b) {
  using wcplx = wc<T>;
  using WMatrix = std::vector<std::vector<wcplx>>;
  const auto n = static_cast<std::size_t>(q.rows());
  WMatrix a(n, std::vector<wcplx>(n)), inv(n, std::vector<wcplx>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      a[i][j] = static_cast<T>(p(static_cast<Eigen::Index>(i))) * widen<T>(q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    a[i][i].re += 1;
    inv[i][i].re = 1;
  }
  const WMatrix kernel = a;

  // Gauss-Jordan with partial pivoting.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (magnitude1(a[r][col]) > magnitude1(a[piv][col])) piv = r;
    if (magnitude1(a[piv][col]) == 0) throw NumericalConditioning("inverse-kernel system is singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const wcplx d = inverse(a[col][col]);
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] = a[col][j] * d;
      inv[col][j] = inv[col][j] * d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const wcplx f = a[r][col];
      if (f.re == 0 && f.im == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] = a[r][j] - f * a[col][j];
        inv[r][j] = inv[r][j] - f * inv[col][j];
      }
    }
  }

  KernelSolution out;
  out.c.resize(q.rows(), q.cols());
  out.x.resize(q.rows());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wcplx xi;
    for (std::size_t j = 0; j < n; ++j) {
      out.c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = narrow(inv[i][j]);
      xi = xi + inv[i][j] * (static_cast<T>(p(static_cast<Eigen::Index>(j))) * widen<T>(b(static_cast<Eigen::Index>(j))));
      wcplx r;
      for (std::size_t l = 0; l < n; ++l) r = r + inv[i][l] * kernel[l][j];
      if (i == j) r.re -= 1;
      worst = std::max(worst, std::abs(narrow(r)));
    }
    out.x(static_cast<Eigen::Index>(i)) = narrow(wcplx{} - xi);
  }
  out.residual = worst;
  return out;
}

}  // namespace

KernelSolution solve_kernel_wide(const CMatrix& q, const Eigen::VectorXd& p, const CVector& b, double target) {
  KernelSolution sol = solve<long double>(q, p, b);
#if defined(__SIZEOF_FLOAT128__)
  if (!(sol.residual <= target)) sol = solve<__float128>(q, p, b);
#endif
  return sol;
}

}  // namespace capa::detail

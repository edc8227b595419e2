#include "capa/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "capa/errors.hpp"
#include "capa/simd/kernels.hpp"

namespace capa {

namespace {

// P_m(x) and P_m'(x) by the three-term recurrence (m >= 1, |x| < 1).
std::pair<double, double> legendre(std::size_t m, double x) {
  double p0 = 1.0, p1 = x;
  for (std::size_t k = 2; k <= m; ++k) {
    const double kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    p0 = p1;
    p1 = p2;
  }
  return {p1, static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussLegendreRule gauss_legendre(int order) {
  if (order < 1) throw ValidationError("quadrature order must be >= 1");
  const auto m = static_cast<std::size_t>(order);
  GaussLegendreRule rule;
  if (m == 1) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
    return rule;
  }
  rule.nodes.assign(m, 0.0);
  rule.weights.assign(m, 0.0);
  for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(m, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-14) break;
    }
    const double dp = legendre(m, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  return rule;
}

ApertureGrid make_grid(const Aperture& aperture, int order) {
  aperture.validate();
  const GaussLegendreRule rule = gauss_legendre(order);
  ApertureGrid grid;
  grid.aperture = aperture;
  grid.order = order;
  const double hx = 0.5 * aperture.len_x, hy = 0.5 * aperture.len_y;
  grid.nodes.reserve(rule.nodes.size() * rule.nodes.size());
  grid.weights.reserve(grid.nodes.capacity());
  for (std::size_t ix = 0; ix < rule.nodes.size(); ++ix) {
    for (std::size_t iy = 0; iy < rule.nodes.size(); ++iy) {
      grid.nodes.emplace_back(hx * rule.nodes[ix], hy * rule.nodes[iy], 0.0);
      grid.weights.push_back(hx * hy * rule.weights[ix] * rule.weights[iy]);
    }
  }
  return grid;
}

ChannelSample sample_channel(const UserGeometry& user, const ApertureGrid& grid, const Radio& radio) {
  ChannelSample sample;
  sample.values.reserve(grid.size());
  for (const Vec3& s : grid.nodes) sample.values.push_back(channel_scalar(user, s, radio));
  return sample;
}

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> weights) {
  if (a.size() != b.size() || a.size() != weights.size())
    throw std::invalid_argument("inner_product: operands sampled on different node sets");
  return simd::weighted_inner(a, b, weights);
}

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b, const ApertureGrid& grid) {
  return inner_product(a, b, std::span<const double>(grid.weights));
}

ChannelSet::ChannelSet(std::vector<double> weights, RowMajorCMatrix samples)
    : weights_(std::move(weights)), samples_(std::move(samples)) {
  if (static_cast<std::size_t>(samples_.cols()) != weights_.size())
    throw std::invalid_argument("ChannelSet: sample width does not match the node count");
}

CMatrix ChannelSet::gram() const {
  const auto k = static_cast<Eigen::Index>(num_users());
  CMatrix g(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    g(i, i) = simd::weighted_norm2(channel(static_cast<std::size_t>(i)), weights_);
    for (Eigen::Index j = i + 1; j < k; ++j) {
      g(i, j) = simd::weighted_inner(channel(static_cast<std::size_t>(i)), channel(static_cast<std::size_t>(j)), weights_);
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

std::vector<cplx> ChannelSet::synthesize(const CVector& coeffs) const {
  if (static_cast<std::size_t>(coeffs.size()) != num_users())
    throw std::invalid_argument("synthesize: coefficient count differs from user count");
  std::vector<cplx> out(num_nodes(), cplx(0.0));
  for (std::size_t j = 0; j < num_users(); ++j) {
    if (coeffs[static_cast<Eigen::Index>(j)] == cplx(0.0)) continue;
    simd::axpy_conj(coeffs[static_cast<Eigen::Index>(j)], channel(j), out);
  }
  return out;
}

}  // namespace capa

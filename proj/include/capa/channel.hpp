#pragma once

// Quadrature grids, sampled channels and the node-set inner product.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "capa/geometry.hpp"

namespace capa {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RowMajorCMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

/// M-point Gauss-Legendre rule by Newton iteration on P_M.
GaussLegendreRule gauss_legendre(int order);

/// Tensor-product Gauss-Legendre grid on an aperture.  Node n = ix*M + iy.
struct ApertureGrid {
  Aperture aperture;
  int order = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // m^2

  std::size_t size() const { return nodes.size(); }
};

ApertureGrid make_grid(const Aperture& aperture, int order);

struct ChannelSample {
  int group = 0;
  int index = 0;  // within the group
  double noise_variance = 0.0;
  std::vector<cplx> values;  // one per grid node, node order
};

ChannelSample sample_channel(const UserGeometry& user, const ApertureGrid& grid, const Radio& radio);

/// Sum_n w_n a_n conj(b_n): the continuous <a, b> evaluated on a node set.
cplx inner_product(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> weights);
cplx inner_product(std::span<const cplx> a, std::span<const cplx> b, const ApertureGrid& grid);

/// Channels of all users tabulated on one weighted node set.
///
/// This is the only thing the optimizers know about the transmitter: the
/// continuous aperture (quadrature nodes and weights) and the discrete array
/// (antenna positions with unit weights) both reduce to it.
class ChannelSet {
 public:
  ChannelSet() = default;
  ChannelSet(std::vector<double> weights, RowMajorCMatrix samples);

  std::size_t num_users() const { return static_cast<std::size_t>(samples_.rows()); }
  std::size_t num_nodes() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  std::span<const cplx> channel(std::size_t user) const {
    return {samples_.data() + user * num_nodes(), num_nodes()};
  }
  const RowMajorCMatrix& samples() const { return samples_; }

  /// gram(i, j) = <h_i, h_j>.
  CMatrix gram() const;

  /// Grid values of sum_j coeffs_j conj(h_j).
  std::vector<cplx> synthesize(const CVector& coeffs) const;

 private:
  std::vector<double> weights_;
  RowMajorCMatrix samples_;
};

}  // namespace capa

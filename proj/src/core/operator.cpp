// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/core/operator.hpp"

#include <span>

#include <fmt/format.h>

#include "gpdphs/error.hpp"
#include "gpdphs/simd/kernels.hpp"

namespace gpdphs::core {

namespace {

void check_field(const Eigen::Ref<const Eigen::MatrixXd>& f, const SpatialGrid& grid) {
  if (static_cast<std::size_t>(f.rows()) != grid.n_points()) {
    throw DimensionError(
        fmt::format("field has {} rows, grid has {} points", f.rows(), grid.n_points()));
  }
}

}  // namespace

Eigen::MatrixXd spatial_derivative(const Eigen::Ref<const Eigen::MatrixXd>& f, const SpatialGrid& grid,
                                   DerivativeScheme scheme) {
  check_field(f, grid);
  const Eigen::Index n_pts = f.rows();
  const double h = grid.spacing();
  Eigen::MatrixXd out(n_pts, f.cols());
  Eigen::VectorXd col(n_pts);
  Eigen::VectorXd d(n_pts);
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    col = f.col(k);
    simd::central_difference(std::span<const double>(col.data(), static_cast<std::size_t>(n_pts)),
                             0.5 / h, std::span<double>(d.data(), static_cast<std::size_t>(n_pts)));
    const Eigen::Index m = n_pts - 1;
    if (scheme == DerivativeScheme::kSecondOrderOneSided) {
      d(0) = (-3.0 * col(0) + 4.0 * col(1) - col(2)) / (2.0 * h);
      d(m) = (3.0 * col(m) - 4.0 * col(m - 1) + col(m - 2)) / (2.0 * h);
    } else {
      d(0) = (col(1) - col(0)) / h;
      d(m) = (col(m) - col(m - 1)) / h;
    }
    out.col(k) = d;
  }
  return out;
}

Eigen::MatrixXd derivative_matrix(const SpatialGrid& grid, DerivativeScheme scheme) {
  const auto n_pts = static_cast<Eigen::Index>(grid.n_points());
  return spatial_derivative(Eigen::MatrixXd::Identity(n_pts, n_pts), grid, scheme);
}

Eigen::MatrixXd apply_structure_operator(const Eigen::Ref<const Eigen::MatrixXd>& e_field,
                                         const StructureMatrices& s, const SpatialGrid& grid,
                                         DerivativeScheme scheme) {
  if (static_cast<std::size_t>(e_field.cols()) != s.n()) {
    throw DimensionError(fmt::format("co-energy field has {} components, structure has {}",
                                     e_field.cols(), s.n()));
  }
  const Eigen::MatrixXd de = spatial_derivative(e_field, grid, scheme);
  return de * s.p1().transpose() + e_field * s.zeroth_order().transpose();
}

Eigen::MatrixXd structure_operator_matrix(const StructureMatrices& s, const SpatialGrid& grid,
                                          DerivativeScheme scheme) {
  const Eigen::MatrixXd d = derivative_matrix(grid, scheme);
  const auto n = static_cast<Eigen::Index>(s.n());
  const Eigen::Index n_pts = d.rows();
  const Eigen::MatrixXd z = s.zeroth_order();
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n_pts * n, n_pts * n);
  for (Eigen::Index i = 0; i < n_pts; ++i) {
    for (Eigen::Index j = 0; j < n_pts; ++j) {
      if (d(i, j) != 0.0) {
        op.block(i * n, j * n, n, n) = d(i, j) * s.p1();
      }
    }
    op.block(i * n, i * n, n, n) += z;
  }
  return op;
}

double dissipated_power(const Eigen::Ref<const Eigen::MatrixXd>& e_field, const StructureMatrices& s,
                        const SpatialGrid& grid) {
  check_field(e_field, grid);
  const Eigen::VectorXd integrand = ((e_field * s.g0()).array() * e_field.array()).rowwise().sum();
  return integrate(grid, integrand);
}

Eigen::VectorXd stack_point_major(const Eigen::Ref<const Eigen::MatrixXd>& field) {
  const Eigen::MatrixXd t = field.transpose();
  return Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
}

Eigen::MatrixXd unstack_point_major(const Eigen::Ref<const Eigen::VectorXd>& stacked, std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  if (k == 0 || stacked.size() % k != 0) {
    throw DimensionError(fmt::format("stacked vector of size {} is not a multiple of {}", stacked.size(), n));
  }
  const Eigen::Map<const Eigen::MatrixXd> t(stacked.data(), k, stacked.size() / k);
  return t.transpose();
}

}  // namespace gpdphs::core

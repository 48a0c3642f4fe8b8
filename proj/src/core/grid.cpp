// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/core/grid.hpp"

#include <cmath>
#include <span>

#include <fmt/format.h>

#include "gpdphs/error.hpp"
#include "gpdphs/simd/kernels.hpp"

namespace gpdphs::core {

SpatialGrid::SpatialGrid(double a, double b, std::size_t n_points)
    : a_(a), b_(b), n_points_(n_points) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b)) {
    throw InvariantError(fmt::format("spatial grid needs a < b, got [{}, {}]", a, b));
  }
  if (n_points < 3) {
    throw InvariantError(fmt::format("spatial grid needs at least 3 points, got {}", n_points));
  }
  h_ = (b - a) / static_cast<double>(n_points - 1);
  weights_.assign(n_points, h_);
  weights_.front() = 0.5 * h_;
  weights_.back() = 0.5 * h_;
}

Eigen::VectorXd SpatialGrid::nodes() const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(n_points_));
  for (std::size_t j = 0; j < n_points_; ++j) z[static_cast<Eigen::Index>(j)] = this->z(j);
  return z;
}

double integrate(const SpatialGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f) {
  if (static_cast<std::size_t>(f.size()) != grid.n_points()) {
    throw DimensionError(
        fmt::format("integrand has {} samples, grid has {}", f.size(), grid.n_points()));
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(f.size());
  const Eigen::VectorXd fc = f;
  return simd::weighted_dot(grid.weights(), std::span<const double>(fc.data(), fc.size()),
                            std::span<const double>(ones.data(), ones.size()));
}

}  // namespace gpdphs::core

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace gpdphs::core {

/// Uniform grid on [a, b] with n_points >= 3 nodes, endpoints included.
class SpatialGrid {
 public:
  SpatialGrid(double a, double b, std::size_t n_points);

  double a() const { return a_; }
  double b() const { return b_; }
  double length() const { return b_ - a_; }
  std::size_t n_points() const { return n_points_; }
  double spacing() const { return h_; }
  double z(std::size_t j) const { return a_ + static_cast<double>(j) * h_; }

  Eigen::VectorXd nodes() const;

  /// Trapezoidal quadrature weights; they are also the norm of the
  /// summation-by-parts difference operator.
  const std::vector<double>& weights() const { return weights_; }

  friend bool operator==(const SpatialGrid& l, const SpatialGrid& r) {
    return l.a_ == r.a_ && l.b_ == r.b_ && l.n_points_ == r.n_points_;
  }

 private:
  double a_;
  double b_;
  std::size_t n_points_;
  double h_;
  std::vector<double> weights_;
};

/// Trapezoidal rule of sampled values f(z_j).
double integrate(const SpatialGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f);

}  // namespace gpdphs::core

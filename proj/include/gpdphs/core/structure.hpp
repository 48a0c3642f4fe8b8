// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/core/grid.hpp"

namespace gpdphs::core {

/// Constant operators of dx/dt = (P1 d/dz + (P0 - G0)) dH/dx.
///
/// Construction rejects a non-symmetric P1, non-skew P0, or a G0 that is
/// not symmetric positive semidefinite. P1 > 0 is only reported through
/// warnings(): the shallow-water instance has an indefinite P1.
class StructureMatrices {
 public:
  StructureMatrices(Eigen::MatrixXd p1, Eigen::MatrixXd p0, Eigen::MatrixXd g0);

  std::size_t n() const { return static_cast<std::size_t>(p1_.rows()); }
  const Eigen::MatrixXd& p1() const { return p1_; }
  const Eigen::MatrixXd& p0() const { return p0_; }
  const Eigen::MatrixXd& g0() const { return g0_; }

  /// P0 - G0, the zeroth-order part of the operator.
  Eigen::MatrixXd zeroth_order() const { return p0_ - g0_; }

  bool p1_positive_definite() const { return p1_positive_definite_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Eigen::MatrixXd p1_;
  Eigen::MatrixXd p0_;
  Eigen::MatrixXd g0_;
  bool p1_positive_definite_ = false;
  std::vector<std::string> warnings_;
};

/// State x(z_j) sampled on a grid: one row per node, one column per component.
class StateField {
 public:
  StateField(SpatialGrid grid, Eigen::MatrixXd values);
  StateField(SpatialGrid grid, std::size_t n);

  const SpatialGrid& grid() const { return grid_; }
  std::size_t n() const { return static_cast<std::size_t>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  Eigen::VectorXd at(std::size_t j) const { return values_.row(static_cast<Eigen::Index>(j)); }

 private:
  SpatialGrid grid_;
  Eigen::MatrixXd values_;
};

}  // namespace gpdphs::core

// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/core/structure.hpp"

#include <utility>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::core {

namespace {
constexpr double kStructureTol = 1e-12;
}

StructureMatrices::StructureMatrices(Eigen::MatrixXd p1, Eigen::MatrixXd p0, Eigen::MatrixXd g0)
    : p1_(std::move(p1)), p0_(std::move(p0)), g0_(std::move(g0)) {
  const auto n = p1_.rows();
  if (n == 0 || p1_.cols() != n || p0_.rows() != n || p0_.cols() != n || g0_.rows() != n ||
      g0_.cols() != n) {
    throw DimensionError(fmt::format("structure matrices must all be n x n (P1 {}x{}, P0 {}x{}, G0 {}x{})",
                                     p1_.rows(), p1_.cols(), p0_.rows(), p0_.cols(), g0_.rows(),
                                     g0_.cols()));
  }
  if (!p1_.allFinite() || !p0_.allFinite() || !g0_.allFinite()) {
    throw InvariantError("structure matrices contain non-finite entries");
  }
  if ((p1_ - p1_.transpose()).norm() >= kStructureTol) {
    throw InvariantError("P1 must be symmetric");
  }
  if ((p0_ + p0_.transpose()).norm() >= kStructureTol) {
    throw InvariantError("P0 must be skew-symmetric");
  }
  if ((g0_ - g0_.transpose()).norm() >= kStructureTol) {
    throw InvariantError("G0 must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> g0_eig(g0_, Eigen::EigenvaluesOnly);
  if (g0_eig.eigenvalues().minCoeff() < -kStructureTol) {
    throw InvariantError(fmt::format("G0 must be positive semidefinite (min eigenvalue {:.3e})",
                                     g0_eig.eigenvalues().minCoeff()));
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> p1_eig(p1_, Eigen::EigenvaluesOnly);
  p1_positive_definite_ = p1_eig.eigenvalues().minCoeff() > 0.0;
  if (!p1_positive_definite_) {
    warnings_.push_back(fmt::format("P1 is not positive definite (min eigenvalue {:.3e})",
                                    p1_eig.eigenvalues().minCoeff()));
  }
}

StateField::StateField(SpatialGrid grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != grid_.n_points() || values_.cols() == 0) {
    throw DimensionError(fmt::format("state field has {} rows, grid has {} points",
                                     values_.rows(), grid_.n_points()));
  }
}

StateField::StateField(SpatialGrid grid, std::size_t n)
    : StateField(grid, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.n_points()),
                                             static_cast<Eigen::Index>(n))) {}

}  // namespace gpdphs::core

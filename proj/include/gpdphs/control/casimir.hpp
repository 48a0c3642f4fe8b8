// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/core/boundary.hpp"
#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/structure.hpp"

namespace gpdphs::control {

/// Casimirs C_i = Gamma_i^T x_c + Psi_i(x) with Psi_i linear in the state,
/// Psi_i(x) = integral of dPsi_i/dx . x.
class CasimirSpec {
 public:
  /// gamma is n_c x m (column i belongs to Casimir i); variational holds m
  /// fields of shape n_points x n sampled on `grid`.
  CasimirSpec(Eigen::MatrixXd gamma, std::vector<Eigen::MatrixXd> variational, core::SpatialGrid grid);

  std::size_t count() const { return variational_.size(); }
  std::size_t n_c() const { return static_cast<std::size_t>(gamma_.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(variational_.front().cols()); }
  const Eigen::MatrixXd& gamma() const { return gamma_; }
  const std::vector<Eigen::MatrixXd>& variational() const { return variational_; }
  const core::SpatialGrid& grid() const { return grid_; }

  /// m x (n_points * n): row i maps the point-major stacked state to Psi_i.
  Eigen::MatrixXd psi_weights() const;
  /// 2n x m: column i is (dPsi_i/dx(b); dPsi_i/dx(a)).
  Eigen::MatrixXd boundary_traces() const;

 private:
  Eigen::MatrixXd gamma_;
  std::vector<Eigen::MatrixXd> variational_;
  core::SpatialGrid grid_;
};

struct CasimirPdeReport {
  std::vector<double> residuals;  // max-norm residual per Casimir
  double max_residual = 0.0;
  bool pass = false;
};

constexpr double kCasimirPdeTolerance = 1e-6;

CasimirPdeReport check_casimir_pde(const CasimirSpec& cs, const core::StructureMatrices& s,
                                   const core::SpatialGrid& grid);

/// Psi_i(x) for each Casimir.
Eigen::VectorXd psi_values(const CasimirSpec& cs, const core::StateField& state);

/// Gamma^T x_c + Psi(x).
Eigen::VectorXd casimir_values(const CasimirSpec& cs, const core::StateField& state,
                               const Eigen::Ref<const Eigen::VectorXd>& x_c);

}  // namespace gpdphs::control

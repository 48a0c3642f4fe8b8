// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/operator.hpp"
#include "gpdphs/core/structure.hpp"
#include "gpdphs/gp/kernel.hpp"

namespace gpdphs::learn {

/// d^2 k / dx dx'^T of the SE kernel over stacked states:
/// k(x, x') (L^-1 - L^-1 r r^T L^-1), r = x - x', L = diag(l^2).
Eigen::MatrixXd se_gradient_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& x2, const gp::Hyperparams& h);

/// B (d^2 k / dx dx'^T) B^T with B the discretized structure operator.
Eigen::MatrixXd dphs_kernel(const Eigen::Ref<const Eigen::VectorXd>& x_stacked,
                            const Eigen::Ref<const Eigen::VectorXd>& x2_stacked, const core::StructureMatrices& s,
                            const core::SpatialGrid& grid, const gp::Hyperparams& h);

/// Same as dphs_kernel with a precomputed operator matrix B.
Eigen::MatrixXd dphs_kernel(const Eigen::Ref<const Eigen::VectorXd>& x_stacked,
                            const Eigen::Ref<const Eigen::VectorXd>& x2_stacked, const Eigen::MatrixXd& op,
                            const gp::Hyperparams& h);

struct DphsFitOptions {
  bool optimize = false;
  std::uint64_t seed = 0;
  int n_starts = 4;
};

/// GP over state derivatives dx/dt = B grad H(x) with the dphs kernel.
/// Desk-scale only: the Gram matrix is (N_t N_e n) square.
class DphsDynamicsGp {
 public:
  static DphsDynamicsGp fit(Eigen::MatrixXd states, Eigen::MatrixXd derivs, const core::StructureMatrices& s,
                            const core::SpatialGrid& grid, gp::Hyperparams h, const DphsFitOptions& opts = {});

  /// Posterior mean of dx/dt at a stacked state.
  Eigen::VectorXd predict_derivative(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Posterior mean of the latent grad H at a stacked state.
  Eigen::VectorXd predict_co_energy(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const gp::Hyperparams& hyper() const { return hyper_; }
  double nlml() const { return nlml_; }

 private:
  Eigen::MatrixXd states_;
  Eigen::MatrixXd op_;
  gp::Hyperparams hyper_;
  Eigen::VectorXd alpha_;
  double nlml_ = 0.0;
};

/// NLML of stacked derivative data under the dphs kernel.
double dphs_nlml(const Eigen::Ref<const Eigen::MatrixXd>& states, const Eigen::Ref<const Eigen::MatrixXd>& derivs,
                 const Eigen::MatrixXd& op, const gp::Hyperparams& h);

}  // namespace gpdphs::learn

// SPDX-License-Identifier: Apache-2.0
//
// Shallow-water channel: state x = (q, p) (water level, momentum),
// co-energy e = (P, Q) (pressure, flow).

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/control/casimir.hpp"
#include "gpdphs/core/boundary.hpp"
#include "gpdphs/core/density.hpp"
#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/structure.hpp"
#include "gpdphs/gp/kernel.hpp"
#include "gpdphs/learn/hamiltonian.hpp"

namespace gpdphs::swe {

struct SweParams {
  double length_l = 1.0;  // m
  double d = 0.5;         // friction
  double g = 9.81;        // m/s^2
  double delta_center = 5.0;
  double q_bar = 0.3;
  double p_bar = 11.8;
  double xi1 = 1.0;
  double xi2 = 1.0;

  void validate() const;
};

/// 1/2 (q p^2 + exp(-(p - c)^2) + g q^2)
double true_density(double q, double p, const SweParams& params);

/// (P, Q) = (p^2/2 + g q, q p - (p - c) exp(-(p - c)^2))
std::pair<double, double> true_co_energy(double q, double p, const SweParams& params);

/// True density, or with include_delta = false only its quadratic part.
class SweDensity final : public core::DensityModel {
 public:
  explicit SweDensity(SweParams params, bool include_delta = true);

  std::size_t dim() const override { return 2; }
  double density(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::MatrixXd hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  SweParams params_;
  bool include_delta_;
};

/// Prior mean 1/2 (q p^2 + g q^2) used for the density GP.
gp::MeanFunction prior_mean(double g);
learn::PriorDescriptor prior_descriptor(double g);

/// Rebuilds a prior mean from its descriptor ("zero" or "swe_quadratic").
gp::MeanFunction mean_from_descriptor(const learn::PriorDescriptor& d, std::size_t dim);

core::StructureMatrices structure(const SweParams& params);
core::SpatialGrid grid(const SweParams& params, std::size_t n_points);

/// u = (Q(0), P(L)).
std::vector<core::TraceSelector> control_inputs();
/// u = (Q(0), Q(L)): both ends closed when u = 0.
std::vector<core::TraceSelector> closed_gate_inputs();

/// W, Wt for u = (Q(0), P(L)), y = (P(0), -Q(L)), written out by hand.
core::BoundaryIoMatrices explicit_io_matrices();

struct EquilibriumProfile {
  Eigen::MatrixXd co_energy;   // n_points x 2: (P*, Q*)
  core::StateField state;      // (q*, p*)
  Eigen::VectorXd boundary_input;  // (Q*(0), P*(L))
};

/// Co-energy targets, n_points x 2: P*(z) = q_bar D (L - z) + p_bar, Q* = q_bar.
Eigen::MatrixXd equilibrium_co_energy(const SweParams& params, const core::SpatialGrid& grid);

/// Co-energy targets mapped back to (q*, p*) by damped Newton per node.
/// Throws ConvergenceError naming the grid point when no admissible state
/// (q > 0) reproduces the target.
EquilibriumProfile equilibrium_profile(const SweParams& params, const core::SpatialGrid& grid,
                                       const core::DensityModel& density);
EquilibriumProfile equilibrium_profile(const SweParams& params, const core::SpatialGrid& grid);

/// Gamma = -I, Psi_1 = int D (L - z) q + p, Psi_2 = int q.
control::CasimirSpec casimirs(const SweParams& params, const core::SpatialGrid& grid);

/// ybar = y - (2 D int Q dz, 0) + [[D L, 0], [0, 0]] u, with Q the model flow.
Eigen::VectorXd passive_output_closed_form(const Eigen::Ref<const Eigen::VectorXd>& y,
                                           const Eigen::Ref<const Eigen::VectorXd>& u,
                                           const Eigen::Ref<const Eigen::MatrixXd>& e_field, const SweParams& params,
                                           const core::SpatialGrid& grid);

/// Initial condition q = q0, p = p0.
core::StateField uniform_state(const core::SpatialGrid& grid, double q0, double p0);

/// M uniform draws from the box, rows (q, p, density).
Eigen::MatrixXd density_samples(const SweParams& params, std::size_t m, const Eigen::Vector2d& lower,
                                const Eigen::Vector2d& upper, std::uint64_t seed, bool include_delta = true);

/// RMS of (model - truth) over an n x n grid on the box.
double density_rms_error(const core::DensityModel& model, const core::DensityModel& truth,
                         const Eigen::Vector2d& lower, const Eigen::Vector2d& upper, std::size_t n);

}  // namespace gpdphs::swe

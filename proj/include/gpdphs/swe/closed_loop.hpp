// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "gpdphs/control/casimir.hpp"
#include "gpdphs/control/passive_output.hpp"
#include "gpdphs/core/boundary.hpp"
#include "gpdphs/sim/simulator.hpp"
#include "gpdphs/swe/swe.hpp"

namespace gpdphs::swe {

struct WiringReport {
  control::CasimirPdeReport casimir_pde;
  control::MatchingReport matching;
  core::IoValidationReport io;
  bool pass = false;
};

struct WiringOptions {
  double eta_bar = 0.0;
  double confidence = 0.95;
  std::optional<double> epsilon;
};

struct SweClosedLoop {
  sim::ClosedLoopSystem system;
  /// Target computed with the true density; empty only for zero gains
  /// without an admissible equilibrium.
  std::optional<EquilibriumProfile> equilibrium;
  Eigen::VectorXd x_c_star;
  WiringReport checks;
};

/// Wires plant, Casimirs, controller and passive output. `controller_density`
/// is the model the controller is designed from; `plant_density` drives the
/// simulated channel; `true_density` is used for reporting H and for the
/// target equilibrium. Throws InvariantError with the report if a check fails
/// and ConvergenceError if the equilibrium cannot be computed (nonzero gains).
SweClosedLoop build_swe_closed_loop(const SweParams& params, const core::SpatialGrid& grid,
                                    std::shared_ptr<const core::DensityModel> plant_density,
                                    std::shared_ptr<const core::DensityModel> controller_density,
                                    std::shared_ptr<const core::DensityModel> true_density,
                                    const WiringOptions& opts = {});

/// x_c with Gamma^T x_c + Psi(x) = 0, i.e. all Casimirs zero.
Eigen::VectorXd zero_casimir_controller_state(const control::CasimirSpec& cs, const core::StateField& state);

/// Spatial L2 distance between two state fields.
double l2_distance(const core::StateField& a, const core::StateField& b);

}  // namespace gpdphs::swe

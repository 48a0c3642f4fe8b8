// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/swe/closed_loop.hpp"

#include <cmath>
#include <optional>
#include <utility>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::swe {

Eigen::VectorXd zero_casimir_controller_state(const control::CasimirSpec& cs, const core::StateField& state) {
  const Eigen::VectorXd psi = control::psi_values(cs, state);
  return cs.gamma().transpose().fullPivLu().solve(-psi);
}

double l2_distance(const core::StateField& a, const core::StateField& b) {
  const Eigen::MatrixXd d = a.values() - b.values();
  return std::sqrt(core::integrate(a.grid(), d.rowwise().squaredNorm()));
}

SweClosedLoop build_swe_closed_loop(const SweParams& params, const core::SpatialGrid& grid,
                                    std::shared_ptr<const core::DensityModel> plant_density,
                                    std::shared_ptr<const core::DensityModel> controller_density,
                                    std::shared_ptr<const core::DensityModel> true_density,
                                    const WiringOptions& opts) {
  params.validate();
  const core::StructureMatrices s = structure(params);
  const control::CasimirSpec cs = casimirs(params, grid);

  // Controller targets come from the model the controller knows. With zero
  // gains H_c vanishes identically and no target is needed.
  const bool zero_gain = params.xi1 == 0.0 && params.xi2 == 0.0;
  std::optional<EquilibriumProfile> design_eq;
  try {
    design_eq = equilibrium_profile(params, grid, *controller_density);
  } catch (const ConvergenceError&) {
    if (!zero_gain) {
      throw;
    }
  }
  const Eigen::VectorXd x_c_star =
      design_eq ? zero_casimir_controller_state(cs, design_eq->state) : Eigen::VectorXd::Zero(2);

  Eigen::MatrixXd j_c(2, 2);
  j_c << 0.0, 1.0, -1.0, 0.0;
  control::QuadraticHc hc{Eigen::Vector2d(params.xi1, params.xi2), x_c_star,
                          Eigen::Vector2d(params.q_bar, params.p_bar)};
  control::ControllerPhs controller(j_c, Eigen::MatrixXd::Identity(2, 2), hc, x_c_star);
  const control::PassiveOutputConfig poc = control::compute_S(cs, controller, s, grid, Eigen::MatrixXd::Zero(2, 2));

  sim::BoundaryCoupling coupling(s, control_inputs());
  WiringReport checks;
  checks.casimir_pde = control::check_casimir_pde(cs, s, grid);
  checks.matching = control::check_matching_conditions(cs, controller, poc, s, coupling.io());
  checks.io = core::validate_io_matrices(coupling.io());
  checks.pass = checks.casimir_pde.pass && checks.matching.pass && checks.io.pass;
  if (!checks.pass) {
    throw InvariantError(fmt::format(
        "closed-loop wiring failed: Casimir PDE residual {:.3e}, matching residuals {:.3e} / {:.3e}, IO {}",
        checks.casimir_pde.max_residual, checks.matching.residual_dynamics, checks.matching.residual_input,
        checks.io.pass ? "ok" : "invalid"));
  }

  control::RobustnessLedger ledger;
  if (control::coercivity_on_range(s) > 0.0) {
    ledger = control::make_ledger(s, opts.eta_bar, opts.confidence, opts.epsilon);
  }

  const std::shared_ptr<const core::DensityModel> truth = true_density ? true_density : plant_density;
  std::optional<EquilibriumProfile> eq;
  if (truth.get() == controller_density.get()) {
    eq = design_eq;
  } else {
    try {
      eq = equilibrium_profile(params, grid, *truth);
    } catch (const ConvergenceError&) {
      if (!zero_gain) {
        throw;
      }
    }
  }

  sim::Plant plant{s, grid, std::move(plant_density), std::move(coupling), 0, 1e-6};
  sim::ClosedLoopSystem sys{std::move(plant), std::move(controller_density), truth, cs, controller, poc, ledger};
  return SweClosedLoop{std::move(sys), std::move(eq), x_c_star, std::move(checks)};
}

}  // namespace gpdphs::swe

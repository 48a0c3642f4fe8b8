// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "gpdphs/core/density.hpp"
#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"

namespace gpdphs::sim {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError(fmt::format("dt must be positive, got {}", dt));
  }
  if (!(horizon >= dt)) {
    throw ConfigError(fmt::format("horizon {} must be at least dt {}", horizon, dt));
  }
  if (log_every == 0) {
    throw ConfigError("log_every must be at least 1");
  }
  if (!(cfl_guard > 0.0 && cfl_guard <= 1.0)) {
    throw ConfigError(fmt::format("cfl_guard must lie in (0, 1], got {}", cfl_guard));
  }
  if (cfl_check_every == 0) {
    throw ConfigError("cfl_check_every must be at least 1");
  }
}

std::size_t SimConfig::n_steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

namespace {

double weighted_rate(const core::SpatialGrid& grid, const Eigen::MatrixXd& e, const Eigen::MatrixXd& xdot) {
  const Eigen::VectorXd integrand = (e.array() * xdot.array()).rowwise().sum();
  return core::integrate(grid, integrand);
}

double density_integral(const core::DensityModel& model, const core::SpatialGrid& grid, const Eigen::MatrixXd& x) {
  Eigen::VectorXd h(x.rows());
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    h(j) = model.density(x.row(j).transpose());
  }
  return core::integrate(grid, h);
}

Eigen::MatrixXd field_of(const core::DensityModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd e(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    e.row(j) = model.gradient(x.row(j).transpose()).transpose();
  }
  return e;
}

double check_cfl(const Plant& plant, const Eigen::MatrixXd& x, const SimConfig& cfg, double t) {
  const double c = characteristic_speed(plant, x) * cfg.dt / plant.grid.spacing();
  if (c > cfg.cfl_guard) {
    throw SimulationError(
        fmt::format("CFL number {:.3f} exceeds the guard {:.3f} at t = {:.6g} s; reduce dt", c, cfg.cfl_guard, t));
  }
  return c;
}

bool log_step(std::size_t k, std::size_t n_steps, std::size_t every) { return k % every == 0 || k == n_steps; }

}  // namespace

core::StateField step_open_loop(const Plant& plant, const core::StateField& state,
                                const Eigen::Ref<const Eigen::VectorXd>& u, double dt) {
  const Eigen::MatrixXd& x = state.values();
  const Eigen::MatrixXd k1 = plant_rhs(plant, x, u).xdot;
  const Eigen::MatrixXd k2 = plant_rhs(plant, x + 0.5 * dt * k1, u).xdot;
  const Eigen::MatrixXd k3 = plant_rhs(plant, x + 0.5 * dt * k2, u).xdot;
  const Eigen::MatrixXd k4 = plant_rhs(plant, x + dt * k3, u).xdot;
  return core::StateField(state.grid(), x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

OpenLoopTrajectory simulate_open_loop(const Plant& plant, const core::StateField& initial, const InputSignal& input,
                                      const SimConfig& cfg) {
  cfg.validate();
  const std::size_t n_steps = cfg.n_steps();
  const auto& grid = plant.grid;
  OpenLoopTrajectory traj;
  Eigen::MatrixXd x = initial.values();
  guard_state(plant, x, 0.0);

  double t = 0.0;
  Eigen::VectorXd u = input(t);
  PlantEval cur = plant_rhs(plant, x, u);
  double h_prev = density_integral(*plant.density, grid, x);
  double r_prev = 0.0;

  auto record = [&]() {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.u.push_back(u);
    traj.y.push_back(cur.y);
    traj.hamiltonian.push_back(h_prev);
    traj.dissipation.push_back(core::dissipated_power(cur.e, plant.structure, grid));
  };

  for (std::size_t k = 0; k <= n_steps; ++k) {
    if (k % cfg.cfl_check_every == 0) {
      traj.max_cfl = std::max(traj.max_cfl, check_cfl(plant, x, cfg, t));
    }
    if (log_step(k, n_steps, cfg.log_every)) {
      record();
    }
    if (k == n_steps) {
      break;
    }
    // Rate at the start of the step with the input that is held over it.
    r_prev = -core::dissipated_power(cur.e, plant.structure, grid) + cur.y.dot(u);
    const double dt = cfg.dt;
    const Eigen::MatrixXd& k1 = cur.xdot;
    const Eigen::MatrixXd k2 = plant_rhs(plant, x + 0.5 * dt * k1, u).xdot;
    const Eigen::MatrixXd k3 = plant_rhs(plant, x + 0.5 * dt * k2, u).xdot;
    const Eigen::MatrixXd k4 = plant_rhs(plant, x + dt * k3, u).xdot;
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = static_cast<double>(k + 1) * dt;
    guard_state(plant, x, t);

    PlantEval end_held = plant_rhs(plant, x, u);
    const double r_end = -core::dissipated_power(end_held.e, plant.structure, grid) + end_held.y.dot(u);
    const double h_now = density_integral(*plant.density, grid, x);
    traj.max_balance_residual =
        std::max(traj.max_balance_residual, std::abs((h_now - h_prev) / dt - 0.5 * (r_prev + r_end)));
    h_prev = h_now;

    const Eigen::VectorXd u_next = input(t);
    if (u_next == u) {
      cur = std::move(end_held);
    } else {
      u = u_next;
      cur = plant_rhs(plant, x, u);
    }
  }
  return traj;
}

namespace {

struct ClosedEval {
  PlantEval p;
  Eigen::MatrixXd e_ctrl;
  Eigen::VectorXd grad_hc;
  Eigen::VectorXd u;
  Eigen::VectorXd ybar;
  Eigen::VectorXd xcdot;
};

ClosedEval closed_rhs(const ClosedLoopSystem& sys, const Eigen::MatrixXd& x, const Eigen::VectorXd& xc) {
  ClosedEval ev;
  const auto& c = sys.controller;
  ev.grad_hc = c.hc().gradient(xc);
  ev.u = -(c.g_c().transpose() * ev.grad_hc);
  ev.p = plant_rhs(sys.plant, x, ev.u);
  ev.e_ctrl = sys.controller_density == sys.plant.density ? ev.p.e : field_of(*sys.controller_density, x);
  ev.ybar = control::passive_output(ev.p.y, ev.u, ev.e_ctrl, sys.casimirs, c, sys.plant.structure, sys.passive,
                                    sys.plant.grid);
  ev.xcdot = c.j_c() * ev.grad_hc + c.g_c() * ev.ybar;
  return ev;
}

}  // namespace

Trajectory simulate_closed_loop(const ClosedLoopSystem& sys, const SimConfig& cfg, const core::StateField& initial,
                                const Eigen::Ref<const Eigen::VectorXd>& x_c0) {
  cfg.validate();
  const std::size_t n_steps = cfg.n_steps();
  const auto& plant = sys.plant;
  const auto& grid = plant.grid;
  const auto& s = plant.structure;
  const auto& hc = sys.controller.hc();
  const bool shared_model = sys.controller_density == plant.density;
  const auto& true_model = sys.true_density ? *sys.true_density : *plant.density;

  // Shaped co-energy dH_d/dx = e - sum_i (Gamma^-1 grad H_c)_i dPsi_i needs a square invertible Gamma.
  const Eigen::MatrixXd& gamma = sys.casimirs.gamma();
  Eigen::FullPivLU<Eigen::MatrixXd> gamma_lu(gamma);
  const bool have_shaped = gamma.rows() == gamma.cols() && gamma_lu.isInvertible();

  Trajectory traj;
  Eigen::MatrixXd x = initial.values();
  Eigen::VectorXd xc = x_c0;
  if (static_cast<std::size_t>(xc.size()) != sys.controller.n_c()) {
    throw DimensionError("initial controller state has the wrong size");
  }
  guard_state(plant, x, 0.0);

  double t = 0.0;
  ClosedEval cur = closed_rhs(sys, x, xc);
  double mu_prev = density_integral(*sys.controller_density, grid, x);
  double hd_prev = mu_prev + hc.value(xc);
  double hp_prev = shared_model ? mu_prev : density_integral(*plant.density, grid, x);

  auto record = [&]() {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controller_states.push_back(xc);
    traj.u.push_back(cur.u);
    traj.y.push_back(cur.p.y);
    traj.ybar.push_back(cur.ybar);
    AuditRow row;
    row.t = t;
    row.mu_h = mu_prev;
    row.h = (&true_model == sys.controller_density.get()) ? mu_prev : density_integral(true_model, grid, x);
    row.h_c = hc.value(xc);
    row.h_d = row.mu_h + row.h_c;
    row.casimirs = control::casimir_values(sys.casimirs, core::StateField(grid, x), xc);
    row.u_t_y = cur.u.dot(cur.p.y);
    row.ybar_t_u = cur.ybar.dot(cur.u);
    row.dmu_dt = weighted_rate(grid, cur.e_ctrl, cur.p.xdot);
    row.dhd_dt = row.dmu_dt + cur.grad_hc.dot(cur.xcdot);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.prop3_bound = nan;
    row.prop3_bound_shaped = nan;
    if (sys.ledger.lambda > 0.0) {
      row.prop3_bound = control::prop3_decrement(
          sys.ledger, control::g0_scaled_norm_sq(cur.e_ctrl, s, grid, sys.ledger.lambda));
      if (have_shaped) {
        const Eigen::VectorXd coeff = gamma_lu.solve(cur.grad_hc);
        Eigen::MatrixXd e_d = cur.e_ctrl;
        for (std::size_t i = 0; i < sys.casimirs.count(); ++i) {
          e_d -= coeff(static_cast<Eigen::Index>(i)) * sys.casimirs.variational()[i];
        }
        row.prop3_bound_shaped =
            control::prop3_decrement(sys.ledger, control::g0_scaled_norm_sq(e_d, s, grid, sys.ledger.lambda));
      }
    }
    traj.audit.push_back(std::move(row));
  };

  for (std::size_t k = 0; k <= n_steps; ++k) {
    if (k % cfg.cfl_check_every == 0) {
      traj.max_cfl = std::max(traj.max_cfl, check_cfl(plant, x, cfg, t));
    }
    if (log_step(k, n_steps, cfg.log_every)) {
      record();
    }
    if (k == n_steps) {
      break;
    }
    const double r_prev = -core::dissipated_power(cur.p.e, s, grid) + cur.p.y.dot(cur.u);
    const double dt = cfg.dt;
    const ClosedEval k2 = closed_rhs(sys, x + 0.5 * dt * cur.p.xdot, xc + 0.5 * dt * cur.xcdot);
    const ClosedEval k3 = closed_rhs(sys, x + 0.5 * dt * k2.p.xdot, xc + 0.5 * dt * k2.xcdot);
    const ClosedEval k4 = closed_rhs(sys, x + dt * k3.p.xdot, xc + dt * k3.xcdot);
    x += dt / 6.0 * (cur.p.xdot + 2.0 * k2.p.xdot + 2.0 * k3.p.xdot + k4.p.xdot);
    xc += dt / 6.0 * (cur.xcdot + 2.0 * k2.xcdot + 2.0 * k3.xcdot + k4.xcdot);
    t = static_cast<double>(k + 1) * dt;
    guard_state(plant, x, t);
    if (!xc.allFinite()) {
      throw SimulationError(fmt::format("controller state became non-finite at t = {:.6g} s", t));
    }

    cur = closed_rhs(sys, x, xc);
    const double mu_now = density_integral(*sys.controller_density, grid, x);
    const double hd_now = mu_now + hc.value(xc);
    traj.max_hd_increment = std::max(traj.max_hd_increment, hd_now - hd_prev);
    const double hp_now = shared_model ? mu_now : density_integral(*plant.density, grid, x);
    const double r_now = -core::dissipated_power(cur.p.e, s, grid) + cur.p.y.dot(cur.u);
    traj.max_balance_residual =
        std::max(traj.max_balance_residual, std::abs((hp_now - hp_prev) / dt - 0.5 * (r_prev + r_now)));
    mu_prev = mu_now;
    hd_prev = hd_now;
    hp_prev = hp_now;
  }
  return traj;
}

}  // namespace gpdphs::sim

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/control/casimir.hpp"
#include "gpdphs/control/controller.hpp"
#include "gpdphs/control/passive_output.hpp"
#include "gpdphs/control/robustness.hpp"
#include "gpdphs/core/structure.hpp"
#include "gpdphs/sim/plant.hpp"

namespace gpdphs::sim {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  std::size_t log_every = 10;
  double cfl_guard = 1.0;
  std::size_t cfl_check_every = 100;

  void validate() const;
  std::size_t n_steps() const;
};

/// One RK4 step with u held constant.
core::StateField step_open_loop(const Plant& plant, const core::StateField& state,
                                const Eigen::Ref<const Eigen::VectorXd>& u, double dt);

struct OpenLoopTrajectory {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> states;
  std::vector<Eigen::VectorXd> u;
  std::vector<Eigen::VectorXd> y;
  std::vector<double> hamiltonian;
  std::vector<double> dissipation;  // integral of e^T G0 e
  /// max over steps of |(H_{k+1} - H_k)/dt - trapezoid(-diss + y^T u)|
  double max_balance_residual = 0.0;
  double max_cfl = 0.0;
};

using InputSignal = std::function<Eigen::VectorXd(double t)>;

/// The input is sampled at the start of each step and held over it.
OpenLoopTrajectory simulate_open_loop(const Plant& plant, const core::StateField& initial, const InputSignal& input,
                                      const SimConfig& cfg);

/// Plant interconnected with a PHS controller through u = -y_c, u_c = ybar.
struct ClosedLoopSystem {
  Plant plant;
  /// Density the controller was designed from (learned or true).
  std::shared_ptr<const core::DensityModel> controller_density;
  /// Density used for the reported physical energy H.
  std::shared_ptr<const core::DensityModel> true_density;
  control::CasimirSpec casimirs;
  control::ControllerPhs controller;
  control::PassiveOutputConfig passive;
  control::RobustnessLedger ledger;
};

struct AuditRow {
  double t = 0.0;
  double h = 0.0;
  double mu_h = 0.0;
  double h_c = 0.0;
  double h_d = 0.0;
  Eigen::VectorXd casimirs;
  double u_t_y = 0.0;
  double ybar_t_u = 0.0;
  double dmu_dt = 0.0;
  double prop3_bound = 0.0;
  /// Same bound with e replaced by the closed-loop co-energy dH_d/dx on the Casimir leaf (NaN if unavailable).
  double prop3_bound_shaped = 0.0;
  double dhd_dt = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> states;
  std::vector<Eigen::VectorXd> controller_states;
  std::vector<Eigen::VectorXd> u;
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::VectorXd> ybar;
  std::vector<AuditRow> audit;
  /// Largest single-step increase of H_d.
  double max_hd_increment = 0.0;
  /// Largest single-step plant energy-balance residual (plant density).
  double max_balance_residual = 0.0;
  double max_cfl = 0.0;
};

/// Monolithic RK4 over (x, x_c).
Trajectory simulate_closed_loop(const ClosedLoopSystem& sys, const SimConfig& cfg, const core::StateField& initial,
                                const Eigen::Ref<const Eigen::VectorXd>& x_c0);

}  // namespace gpdphs::sim

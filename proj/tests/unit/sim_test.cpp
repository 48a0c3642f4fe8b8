// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"
#include "gpdphs/sim/simulator.hpp"
#include "gpdphs/swe/closed_loop.hpp"
#include "gpdphs/swe/swe.hpp"

using namespace gpdphs;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

sim::Plant channel_plant(const swe::SweParams& params, const core::SpatialGrid& grid,
                         std::vector<core::TraceSelector> inputs = swe::control_inputs()) {
  const auto s = swe::structure(params);
  return sim::Plant{s, grid, std::make_shared<swe::SweDensity>(params), sim::BoundaryCoupling(s, std::move(inputs)),
                    0, 1e-6};
}

core::StateField bump(const core::SpatialGrid& grid) {
  MatrixXd v(grid.n_points(), 2);
  for (std::size_t j = 0; j < grid.n_points(); ++j) {
    const double z = grid.z(j);
    v(static_cast<Eigen::Index>(j), 0) = 1.0 + 0.1 * std::exp(-50.0 * (z - 0.5) * (z - 0.5));
    v(static_cast<Eigen::Index>(j), 1) = 0.0;
  }
  return core::StateField(grid, v);
}

sim::InputSignal constant(VectorXd u) {
  return [u](double) { return u; };
}

}  // namespace

TEST(SimConfig, Validation) {
  sim::SimConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.n_steps(), 10000u);
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.horizon = 1e-4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.log_every = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.cfl_guard = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.cfl_check_every = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PlantRhs, DiscreteEnergyBalanceIsExact) {
  swe::SweParams p;
  const auto grid = swe::grid(p, 41);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uq(0.5, 2.0), up(-1.0, 1.0);
  for (const auto& inputs : {swe::control_inputs(), swe::closed_gate_inputs()}) {
    const auto plant = channel_plant(p, grid, inputs);
    for (int t = 0; t < 10; ++t) {
      MatrixXd x(41, 2);
      for (Eigen::Index j = 0; j < 41; ++j) {
        x(j, 0) = uq(rng);
        x(j, 1) = up(rng);
      }
      const VectorXd u = Eigen::Vector2d(up(rng), uq(rng));
      const auto ev = sim::plant_rhs(plant, x, u);
      const double dh = core::integrate(grid, (ev.e.array() * ev.xdot.array()).rowwise().sum().matrix());
      const double rhs = -core::dissipated_power(ev.e, plant.structure, grid) + ev.y.dot(u);
      EXPECT_NEAR(dh, rhs, 1e-10 * (1.0 + std::abs(rhs) + ev.xdot.norm()));
    }
  }
}

TEST(OpenLoop, RecordCountFollowsLogEvery) {
  swe::SweParams p;
  const auto grid = swe::grid(p, 21);
  const auto plant = channel_plant(p, grid);
  const auto eq = swe::equilibrium_profile(p, grid);
  sim::SimConfig c;
  c.horizon = 0.01;
  const auto tr = sim::simulate_open_loop(plant, eq.state, constant(eq.boundary_input), c);
  ASSERT_EQ(tr.times.size(), 2u);
  EXPECT_EQ(tr.times[0], 0.0);
  EXPECT_NEAR(tr.times[1], 0.01, 1e-15);
  c.log_every = 3;
  EXPECT_EQ(sim::simulate_open_loop(plant, eq.state, constant(eq.boundary_input), c).times.size(), 5u);
}

TEST(OpenLoop, EquilibriumIsAFixedPoint) {
  swe::SweParams p;
  const auto grid = swe::grid(p, 101);
  const auto plant = channel_plant(p, grid);
  const auto eq = swe::equilibrium_profile(p, grid);
  core::StateField x = eq.state;
  for (int k = 0; k < 200; ++k) {
    const auto next = sim::step_open_loop(plant, x, eq.boundary_input, 1e-3);
    EXPECT_LT((next.values() - x.values()).cwiseAbs().maxCoeff(), 1e-8);
    x = next;
  }
  EXPECT_LT((x.values() - eq.state.values()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(OpenLoop, EquilibriumHoldsOverFiveSeconds) {
  swe::SweParams p;
  const auto grid = swe::grid(p, 101);
  const auto plant = channel_plant(p, grid);
  const auto eq = swe::equilibrium_profile(p, grid);
  sim::SimConfig c;
  c.horizon = 5.0;
  c.log_every = 100;
  const auto tr = sim::simulate_open_loop(plant, eq.state, constant(eq.boundary_input), c);
  double worst = 0.0;
  for (const MatrixXd& x : tr.states) worst = std::max(worst, (x - eq.state.values()).cwiseAbs().maxCoeff());
  EXPECT_LT(worst, 1e-3);
}

TEST(OpenLoop, ClosedGateWithoutFrictionConservesEnergy) {
  swe::SweParams p;
  p.d = 0.0;
  const auto grid = swe::grid(p, 51);
  const auto plant = channel_plant(p, grid, swe::closed_gate_inputs());
  sim::SimConfig c;
  c.horizon = 1.0;
  c.log_every = 1;
  const auto tr = sim::simulate_open_loop(plant, bump(grid), constant(VectorXd::Zero(2)), c);
  const double h0 = tr.hamiltonian.front();
  for (std::size_t k = 1; k < tr.hamiltonian.size(); ++k) {
    EXPECT_LT(std::abs(tr.hamiltonian[k] - tr.hamiltonian[k - 1]), 1e-10 * h0);
  }
  EXPECT_LT(std::abs(tr.hamiltonian.back() - h0), 1e-8 * h0);
}

TEST(OpenLoop, SpatialConvergenceOrder) {
  swe::SweParams p;
  sim::SimConfig c;
  c.dt = 2.5e-4;
  c.horizon = 0.2;
  c.log_every = 800;
  std::vector<MatrixXd> finals;
  for (std::size_t n : {51u, 101u, 201u}) {
    const auto grid = swe::grid(p, n);
    const auto plant = channel_plant(p, grid, swe::closed_gate_inputs());
    finals.push_back(sim::simulate_open_loop(plant, bump(grid), constant(VectorXd::Zero(2)), c).states.back());
  }
  // Compare on the coarse nodes.
  auto diff = [](const MatrixXd& coarse, const MatrixXd& fine) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < coarse.rows(); ++j) acc += (coarse.row(j) - fine.row(2 * j)).squaredNorm();
    return std::sqrt(acc / static_cast<double>(coarse.rows()));
  };
  const double e1 = diff(finals[0], finals[1]);
  const double e2 = diff(finals[1], finals[2]);
  const double order = std::log2(e1 / e2);
  EXPECT_GE(order, 1.5) << "e1 = " << e1 << " e2 = " << e2;
}

TEST(OpenLoop, CflGuardAndDryChannel) {
  swe::SweParams p;
  const auto grid = swe::grid(p, 101);
  const auto plant = channel_plant(p, grid);
  const auto eq = swe::equilibrium_profile(p, grid);
  sim::SimConfig c;
  c.dt = 0.05;
  c.horizon = 1.0;
  EXPECT_THROW(sim::simulate_open_loop(plant, eq.state, constant(eq.boundary_input), c), SimulationError);
  sim::SimConfig ok;
  ok.horizon = 0.01;
  auto dry = swe::uniform_state(grid, 1.0, 0.0);
  dry.values()(50, 0) = -0.1;
  EXPECT_THROW(sim::simulate_open_loop(plant, dry, constant(eq.boundary_input), ok), SimulationError);
  auto bad = swe::uniform_state(grid, 1.0, 0.0);
  bad.values()(3, 1) = std::nan("");
  EXPECT_THROW(sim::guard_state(plant, bad.values(), 0.0), SimulationError);
}

TEST(ClosedLoop, ZeroGainsReduceToOpenLoop) {
  for (double bar : {0.0, 1.0}) {
    swe::SweParams p;
    p.xi1 = p.xi2 = 0.0;
    p.q_bar = 0.3 * bar;
    p.p_bar = 11.8 * bar;
    const auto grid = swe::grid(p, 51);
    const auto truth = std::make_shared<swe::SweDensity>(p);
    const auto loop = swe::build_swe_closed_loop(p, grid, truth, truth, truth);
    sim::SimConfig c;
    c.horizon = bar == 0.0 ? 0.003 : 0.5;
    c.log_every = 1;
    const auto x0 = swe::uniform_state(grid, 1.2, 0.0);
    const auto cl = sim::simulate_closed_loop(loop.system, c, x0, VectorXd::Zero(2));
    const auto ol = sim::simulate_open_loop(loop.system.plant, x0, constant(Eigen::Vector2d(p.q_bar, p.p_bar)), c);
    ASSERT_EQ(cl.states.size(), ol.states.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < cl.states.size(); ++k) {
      worst = std::max(worst, (cl.states[k] - ol.states[k]).cwiseAbs().maxCoeff());
      EXPECT_LT((cl.u[k] - Eigen::Vector2d(p.q_bar, p.p_bar)).norm(), 1e-15);
    }
    EXPECT_LT(worst, 1e-10);
  }
}

TEST(ClosedLoop, TrueDesignDoesNotIncreaseShapedEnergy) {
  swe::SweParams p;
  const auto grid = swe::grid(p, 101);
  const auto truth = std::make_shared<swe::SweDensity>(p);
  const auto loop = swe::build_swe_closed_loop(p, grid, truth, truth, truth);
  sim::SimConfig c;
  c.horizon = 2.0;
  const auto x0 = swe::uniform_state(grid, 1.0, 0.0);
  const VectorXd xc0 = swe::zero_casimir_controller_state(loop.system.casimirs, x0);
  const auto tr = sim::simulate_closed_loop(loop.system, c, x0, xc0);
  const double hd0 = tr.audit.front().h_d;
  EXPECT_LT(tr.max_hd_increment, 1e-6 * std::abs(hd0));
  EXPECT_LT(tr.audit.back().h_d, hd0);
  for (const auto& row : tr.audit) {
    EXPECT_LT(row.casimirs.cwiseAbs().maxCoeff(), 1e-3 * (1.0 + std::abs(hd0)));
    EXPECT_TRUE(std::isfinite(row.prop3_bound));
  }
  EXPECT_EQ(tr.audit.size(), 201u);
  EXPECT_LE(tr.max_cfl, 1.0);
}

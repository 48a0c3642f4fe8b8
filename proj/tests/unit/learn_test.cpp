// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"
#include "gpdphs/learn/dphs_kernel.hpp"
#include "gpdphs/learn/eta_bar.hpp"
#include "gpdphs/learn/hamiltonian.hpp"
#include "gpdphs/learn/observations.hpp"
#include "gpdphs/swe/swe.hpp"

using namespace gpdphs;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

sim::Plant channel_plant(const swe::SweParams& params, const core::SpatialGrid& grid) {
  const auto s = swe::structure(params);
  return sim::Plant{s, grid, std::make_shared<swe::SweDensity>(params), sim::BoundaryCoupling(s, swe::control_inputs()),
                    0, 1e-6};
}

// Prior mean equal to a full density model.
gp::MeanFunction mean_of(std::shared_ptr<const core::DensityModel> m) {
  gp::MeanFunction f;
  f.value = [m](const VectorXd& x) { return m->density(x); };
  f.gradient = [m](const VectorXd& x) { return m->gradient(x); };
  f.hessian = [m](const VectorXd& x) { return m->hessian(x); };
  return f;
}

learn::LearnedHamiltonian trained_channel_model(std::uint64_t seed) {
  swe::SweParams params;
  const MatrixXd samples = swe::density_samples(params, 100, {0, -10}, {10, 10}, seed);
  learn::TrainOptions opts;
  opts.optimizer.bounds.sigma_n_min = 1e-4;
  opts.optimizer.search.seed = seed;
  return learn::train_hamiltonian_direct(samples, swe::prior_mean(params.g), swe::prior_descriptor(params.g),
                                         gp::Hyperparams::ard(1.0, Eigen::Vector2d(1, 1), 1e-4), opts)
      .model;
}

}  // namespace

TEST(Observations, FixedPointSamplesEqualEquilibrium) {
  swe::SweParams params;
  const auto grid = swe::grid(params, 51);
  const auto plant = channel_plant(params, grid);
  const auto eq = swe::equilibrium_profile(params, grid);
  sim::SimConfig cfg;
  cfg.horizon = 0.5;
  const VectorXd times = VectorXd::LinSpaced(6, 0.0, 0.5);
  const VectorXd points = VectorXd::LinSpaced(6, 0.0, 1.0);
  const VectorXd u = eq.boundary_input;
  const auto obs = learn::collect_observations(plant, eq.state, [u](double) { return u; }, cfg, times, points);
  for (const MatrixXd& s : obs.states) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      const auto node = static_cast<std::size_t>(std::llround(points(j) * 50.0));
      EXPECT_LT((s.row(j) - eq.state.values().row(static_cast<Eigen::Index>(node))).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Observations, NoiseFreeGridSamplesEqualTrajectory) {
  swe::SweParams params;
  const auto grid = swe::grid(params, 21);
  const auto plant = channel_plant(params, grid);
  const auto x0 = swe::uniform_state(grid, 1.0, 0.0);
  const auto eq = swe::equilibrium_profile(params, grid);
  const VectorXd u = eq.boundary_input;
  const sim::InputSignal input = [u](double) { return u; };
  sim::SimConfig cfg;
  cfg.horizon = 0.2;
  cfg.log_every = 1;
  const VectorXd times = Eigen::Vector3d(0.0, 0.05, 0.2);
  VectorXd points(3);
  points << grid.z(0), grid.z(7), grid.z(20);
  const auto obs = learn::collect_observations(plant, x0, input, cfg, times, points);
  const auto traj = sim::simulate_open_loop(plant, x0, input, cfg);
  const std::size_t steps[] = {0, 50, 200};
  const Eigen::Index nodes[] = {0, 7, 20};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(obs.states[i](j, 0), traj.states[steps[i]](nodes[j], 0));
      EXPECT_EQ(obs.states[i](j, 1), traj.states[steps[i]](nodes[j], 1));
    }
  }
}

TEST(Observations, SinusoidalExcitationShapes) {
  swe::SweParams params;
  const auto grid = swe::grid(params, 51);
  const auto plant = channel_plant(params, grid);
  const auto eq = swe::equilibrium_profile(params, grid);
  const VectorXd u = eq.boundary_input;
  const sim::InputSignal input = [u](double t) {
    VectorXd v = u;
    v(0) += 0.05 * std::sin(2 * std::numbers::pi * t);
    return v;
  };
  sim::SimConfig cfg;
  cfg.horizon = 2.0;
  learn::SamplingOptions so;
  so.noise_std = 1e-3;
  so.seed = 3;
  const auto obs = learn::collect_observations(plant, eq.state, input, cfg, VectorXd::LinSpaced(50, 0.0, 2.0),
                                               VectorXd::LinSpaced(10, 0.0, 1.0), so);
  ASSERT_EQ(obs.n_t(), 50u);
  ASSERT_EQ(obs.n_z(), 10u);
  ASSERT_EQ(obs.n(), 2u);
  for (const MatrixXd& s : obs.states) {
    EXPECT_EQ(s.rows(), 10);
    EXPECT_TRUE(s.allFinite());
  }
  EXPECT_EQ(obs.inputs.rows(), 50);
  EXPECT_NO_THROW(obs.validate(0.0, 1.0));
}

namespace {

learn::ObservationSet synthetic(const std::function<double(double, double)>& f, int nt, int nz) {
  learn::ObservationSet obs;
  obs.times = VectorXd::LinSpaced(nt, 0.0, 1.0);
  obs.points = VectorXd::LinSpaced(nz, 0.0, 1.0);
  obs.inputs = MatrixXd::Zero(nt, 2);
  for (int i = 0; i < nt; ++i) {
    MatrixXd s(nz, 2);
    for (int j = 0; j < nz; ++j) {
      s(j, 0) = f(obs.times(i), obs.points(j));
      s(j, 1) = 0.5 * f(obs.times(i), obs.points(j));
    }
    obs.states.push_back(s);
  }
  return obs;
}

}  // namespace

TEST(Upsample, ConstantFieldHasZeroDerivative) {
  const auto obs = synthetic([](double, double) { return 2.0; }, 12, 6);
  const auto ds = learn::upsample_and_differentiate(obs, 8, gp::Hyperparams::isotropic(1.0, 0.5, 1e-3));
  EXPECT_LT(ds.stacked_derivs.cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_EQ(ds.stacked_states.cols(), 16);
}

TEST(Upsample, RampHasUnitDerivative) {
  const auto obs = synthetic([](double t, double) { return t; }, 30, 5);
  const auto ds = learn::upsample_and_differentiate(obs, 5, gp::Hyperparams::isotropic(1.0, 1.0, 1e-4));
  for (int i = 5; i < 25; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(ds.stacked_derivs(i, 2 * j), 1.0, 5e-2);
  }
}

TEST(Upsample, InterpolatesAtObservationPoints) {
  const auto obs = synthetic([](double t, double z) { return std::sin(t + z); }, 10, 6);
  const VectorXd pts = obs.points;
  const auto ds = learn::upsample_and_differentiate(obs, 6, gp::Hyperparams::isotropic(1.0, 0.15, 0.0), &pts);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 6; ++j) {
      EXPECT_NEAR(ds.stacked_states(i, 2 * j), obs.states[i](j, 0), 1e-6);
      EXPECT_NEAR(ds.stacked_states(i, 2 * j + 1), obs.states[i](j, 1), 1e-6);
    }
}

TEST(DphsKernel, GradientKernelMatchesMixedFiniteDifference) {
  const auto h = gp::Hyperparams::ard(1.3, Eigen::Vector3d(0.7, 1.2, 0.9), 0.0);
  const VectorXd x = Eigen::Vector3d(0.1, -0.4, 0.3);
  const VectorXd x2 = Eigen::Vector3d(-0.2, 0.5, 0.6);
  const MatrixXd k = learn::se_gradient_kernel(x, x2, h);
  const double e = 1e-4;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      VectorXd a = x, b = x, c = x2, d = x2;
      a(i) += e;
      b(i) -= e;
      c(j) += e;
      d(j) -= e;
      const double fd = (gp::se_kernel(a, c, h) - gp::se_kernel(a, d, h) - gp::se_kernel(b, c, h) +
                         gp::se_kernel(b, d, h)) /
                        (4 * e * e);
      EXPECT_NEAR(k(i, j), fd, 1e-6);
    }
}

TEST(DphsKernel, DegenerateOperatorGivesZero) {
  const core::StructureMatrices s(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2));
  const core::SpatialGrid grid(0.0, 1.0, 3);
  const VectorXd x = VectorXd::Random(6);
  EXPECT_EQ(learn::dphs_kernel(x, x, s, grid, gp::Hyperparams::isotropic(1, 1, 0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DphsKernel, SymmetricAtEqualArgumentsAndPsdGram) {
  swe::SweParams params;
  const auto s = swe::structure(params);
  const core::SpatialGrid grid(0.0, 1.0, 3);
  const auto h = gp::Hyperparams::isotropic(1.0, 1.5, 0.0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VectorXd> xs;
  for (int i = 0; i < 4; ++i) {
    VectorXd v(6);
    for (int k = 0; k < 6; ++k) v(k) = u(rng);
    xs.push_back(v);
  }
  const MatrixXd kxx = learn::dphs_kernel(xs[0], xs[0], s, grid, h);
  EXPECT_LT((kxx - kxx.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  MatrixXd gram(24, 24);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gram.block(6 * a, 6 * b, 6, 6) = learn::dphs_kernel(xs[a], xs[b], s, grid, h);
  gram.diagonal().array() += gp::kJitter;
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (gram + gram.transpose()));
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-6);
}

TEST(DphsKernel, MatchesOperatorSandwich) {
  swe::SweParams params;
  const auto s = swe::structure(params);
  const core::SpatialGrid grid(0.0, 1.0, 4);
  const auto h = gp::Hyperparams::isotropic(0.8, 1.1, 0.0);
  const VectorXd x = VectorXd::Random(8), x2 = VectorXd::Random(8);
  const MatrixXd b = core::structure_operator_matrix(s, grid);
  const MatrixXd ref = b * learn::se_gradient_kernel(x, x2, h) * b.transpose();
  EXPECT_LT((learn::dphs_kernel(x, x2, s, grid, h) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DphsDynamicsGp, PredictsTrainingDerivatives) {
  swe::SweParams params;
  const auto s = swe::structure(params);
  const core::SpatialGrid grid(0.0, 1.0, 4);
  const MatrixXd b = core::structure_operator_matrix(s, grid);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  MatrixXd states(6, 8), derivs(6, 8);
  const swe::SweDensity truth(params, false);
  for (int i = 0; i < 6; ++i) {
    for (int k = 0; k < 8; ++k) states(i, k) = u(rng);
    const MatrixXd field = core::unstack_point_major(states.row(i).transpose(), 2);
    const MatrixXd e = core::co_energy_field(truth, core::StateField(grid, field));
    derivs.row(i) = (b * core::stack_point_major(e)).transpose();
  }
  const auto model = learn::DphsDynamicsGp::fit(states, derivs, s, grid, gp::Hyperparams::isotropic(5.0, 2.0, 1e-4));
  for (int i = 0; i < 6; ++i) {
    const VectorXd pred = model.predict_derivative(states.row(i).transpose());
    EXPECT_LT((pred - derivs.row(i).transpose()).cwiseAbs().maxCoeff(), 1e-2 * (1.0 + derivs.row(i).norm()));
  }
  EXPECT_TRUE(std::isfinite(model.nlml()));
}

TEST(TrainDirect, PriorOnlyWorldHasNoCorrection) {
  swe::SweParams params;
  const MatrixXd samples = swe::density_samples(params, 40, {0, -10}, {10, 10}, 3, false);
  const auto tr = learn::train_hamiltonian_direct(samples, swe::prior_mean(params.g), swe::prior_descriptor(params.g),
                                                  gp::Hyperparams::isotropic(1.0, 2.0, 1e-4));
  for (double q = 0.0; q <= 10.0; q += 1.0)
    for (double p = -10.0; p <= 10.0; p += 2.0) EXPECT_LT(std::abs(tr.model.correction(Eigen::Vector2d(q, p))), 1e-3);
  EXPECT_LE(tr.nlml_final, tr.nlml_init);
}

TEST(TrainDirect, ChannelDensityWithinTenPercentOfResidualScale) {
  swe::SweParams params;
  const auto lh = trained_channel_model(7);
  const swe::SweDensity truth(params), prior_only(params, false);
  const double rms = swe::density_rms_error(lh, truth, {0, -10}, {10, 10}, 50);
  const double ref = swe::density_rms_error(prior_only, truth, {0, -10}, {10, 10}, 50);
  EXPECT_LT(rms, 0.1 * ref);
  std::cout << "validation RMS " << rms << " vs RMS(Delta)/2 " << ref << "\n";
}

TEST(TrainDirect, SingleSampleIsInterpolated) {
  swe::SweParams params;
  MatrixXd sample(1, 3);
  sample << 1.0, 0.0, swe::true_density(1.0, 0.0, params);
  learn::TrainOptions opts;
  opts.optimize = false;
  const auto tr = learn::train_hamiltonian_direct(sample, swe::prior_mean(params.g), swe::prior_descriptor(params.g),
                                                  gp::Hyperparams::isotropic(1.0, 1.0, 0.0), opts);
  EXPECT_NEAR(tr.model.density(Eigen::Vector2d(1.0, 0.0)), sample(0, 2), 1e-8);
}

TEST(CoEnergy, ZeroCorrectionReducesToPriorGradient) {
  swe::SweParams params;
  MatrixXd samples(3, 3);
  const auto m = swe::prior_mean(params.g);
  const double pts[3][2] = {{0.5, 1.0}, {3.0, -2.0}, {7.0, 4.0}};
  for (int i = 0; i < 3; ++i) {
    samples(i, 0) = pts[i][0];
    samples(i, 1) = pts[i][1];
    samples(i, 2) = m.value(samples.row(i).head(2).transpose());
  }
  learn::TrainOptions opts;
  opts.optimize = false;
  const auto lh = learn::train_hamiltonian_direct(samples, m, swe::prior_descriptor(params.g),
                                                  gp::Hyperparams::isotropic(1.0, 1.0, 1e-3), opts)
                      .model;
  const auto grid = swe::grid(params, 5);
  const MatrixXd e = learn::co_energy(lh, swe::uniform_state(grid, 1.0, 0.0));
  EXPECT_NEAR(e(2, 0), 9.81, 1e-14);
  EXPECT_NEAR(e(2, 1), 0.0, 1e-14);
  // Gradient of 1/2 (q p^2 + g q^2) at (2, 1) is (p^2/2 + g q, q p) = (0.5 + 2 g, 2).
  const MatrixXd e2 = learn::co_energy(lh, swe::uniform_state(grid, 2.0, 1.0));
  EXPECT_NEAR(e2(0, 0), 0.5 + 2.0 * 9.81, 1e-13);
  EXPECT_NEAR(e2(0, 1), 2.0, 1e-13);
}

TEST(CoEnergy, LearnedDensityMatchesFiniteDifferences) {
  const auto lh = trained_channel_model(8);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uq(0.5, 9.5), up(-9.5, 9.5);
  const double step = 1e-5;
  for (int t = 0; t < 50; ++t) {
    const VectorXd x = Eigen::Vector2d(uq(rng), up(rng));
    const VectorXd g = lh.gradient(x);
    for (int k = 0; k < 2; ++k) {
      VectorXd a = x, b = x;
      a(k) += step;
      b(k) -= step;
      EXPECT_NEAR(g(k), (lh.density(a) - lh.density(b)) / (2 * step), 1e-5);
    }
  }
}

TEST(EtaBar, PerfectModelHasVanishingBound) {
  swe::SweParams params;
  auto truth = std::make_shared<const swe::SweDensity>(params);
  MatrixXd samples(4, 3);
  samples << 1, 0, truth->density(Eigen::Vector2d(1, 0)), 2, 1, truth->density(Eigen::Vector2d(2, 1)), 0.7, -1,
      truth->density(Eigen::Vector2d(0.7, -1)), 2.5, 1.5, truth->density(Eigen::Vector2d(2.5, 1.5));
  learn::TrainOptions opts;
  opts.optimize = false;
  const auto lh = learn::train_hamiltonian_direct(samples, mean_of(truth), {"custom", {}},
                                                  gp::Hyperparams::isotropic(1, 1, 1e-3), opts)
                      .model;
  const auto grid = swe::grid(params, 101);
  learn::DomainBox box{Eigen::Vector2d(0.5, -2), Eigen::Vector2d(3, 2)};
  const auto eb = learn::estimate_eta_bar_oracle(lh, *truth, swe::structure(params), grid, box, 0.95);
  EXPECT_LT(eb.eta_bar, 1e-3);
  EXPECT_EQ(eb.mode, "oracle");
}

TEST(EtaBar, NormalQuantile) {
  EXPECT_NEAR(learn::confidence_quantile(0.95), 1.959963984540054, 1e-12);
  EXPECT_NEAR(learn::confidence_quantile(0.99), 2.5758293035489004, 1e-12);
  EXPECT_THROW(learn::confidence_quantile(1.0), Error);
}

TEST(EtaBar, DeploymentScalesWithQuantile) {
  swe::SweParams params;
  const auto lh = trained_channel_model(9);
  const auto grid = swe::grid(params, 51);
  learn::DomainBox box{Eigen::Vector2d(0.5, -2), Eigen::Vector2d(3, 2)};
  const auto s = swe::structure(params);
  const auto a = learn::estimate_eta_bar_deployment(lh, s, grid, box, 0.95);
  const auto b = learn::estimate_eta_bar_deployment(lh, s, grid, box, 0.99);
  EXPECT_NEAR(b.eta_bar / a.eta_bar, 2.5758293035489004 / 1.959963984540054, 1e-12);
  EXPECT_EQ(a.fields_evaluated, 256u);
}

TEST(EtaBar, ChannelOracleSweepIsFinite) {
  swe::SweParams params;
  const auto lh = trained_channel_model(7);
  const auto grid = swe::grid(params, 101);
  learn::DomainBox box{Eigen::Vector2d(0.5, -2), Eigen::Vector2d(3, 2)};
  const auto eb = learn::estimate_eta_bar_oracle(lh, swe::SweDensity(params), swe::structure(params), grid, box, 0.95);
  EXPECT_TRUE(std::isfinite(eb.eta_bar));
  EXPECT_GT(eb.eta_bar, 0.0);
  EXPECT_EQ(eb.fields_evaluated, 1296u);
  EXPECT_NEAR(eb.eta_bar, 1.1 * eb.raw_max, 1e-15);
}

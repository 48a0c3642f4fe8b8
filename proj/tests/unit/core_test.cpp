// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gpdphs/core/boundary.hpp"
#include "gpdphs/core/density.hpp"
#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/operator.hpp"
#include "gpdphs/core/structure.hpp"
#include "gpdphs/error.hpp"
#include "gpdphs/swe/swe.hpp"

using namespace gpdphs;
using core::BoundaryEnd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

core::StructureMatrices channel(double d = 0.0) {
  MatrixXd p1(2, 2);
  p1 << 0, -1, -1, 0;
  MatrixXd g0 = MatrixXd::Zero(2, 2);
  g0(1, 1) = d;
  return core::StructureMatrices(p1, MatrixXd::Zero(2, 2), g0);
}

core::StructureMatrices scalar_structure() {
  return core::StructureMatrices(MatrixXd::Ones(1, 1), MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1));
}

MatrixXd row(std::initializer_list<double> v) {
  MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

}  // namespace

TEST(Grid, NodesAndTrapezoidWeights) {
  core::SpatialGrid g(0.0, 2.0, 5);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(g.z(4), 2.0);
  EXPECT_DOUBLE_EQ(g.weights()[0], 0.25);
  EXPECT_DOUBLE_EQ(g.weights()[2], 0.5);
  VectorXd f = g.nodes();
  EXPECT_NEAR(core::integrate(g, f), 2.0, 1e-15);
  EXPECT_THROW(core::SpatialGrid(0.0, 1.0, 2), Error);
  EXPECT_THROW(core::SpatialGrid(1.0, 1.0, 5), Error);
}

TEST(Structure, RejectsInvalidOperators) {
  MatrixXd p1(2, 2);
  p1 << 0, -1, -0.5, 0;
  EXPECT_THROW(core::StructureMatrices(p1, MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)), InvariantError);
  MatrixXd ok(2, 2);
  ok << 0, -1, -1, 0;
  MatrixXd p0(2, 2);
  p0 << 1, 0, 0, 0;
  EXPECT_THROW(core::StructureMatrices(ok, p0, MatrixXd::Zero(2, 2)), InvariantError);
  MatrixXd g0(2, 2);
  g0 << -1, 0, 0, 0;
  EXPECT_THROW(core::StructureMatrices(ok, MatrixXd::Zero(2, 2), g0), InvariantError);
  EXPECT_THROW(core::StructureMatrices(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)),
               DimensionError);
}

TEST(Structure, IndefiniteP1IsOnlyAWarning) {
  const auto s = channel(0.5);
  EXPECT_FALSE(s.p1_positive_definite());
  EXPECT_FALSE(s.warnings().empty());
  EXPECT_TRUE(scalar_structure().p1_positive_definite());
}

TEST(BoundaryPort, HandEvaluatedChannelTraces) {
  const auto s = channel();
  const auto port = core::boundary_port(VectorXd::Unit(2, 0), VectorXd::Zero(2), s);
  const double c = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(port.f_bnd(0), 0.0, 1e-15);
  EXPECT_NEAR(port.f_bnd(1), -c, 1e-15);
  EXPECT_NEAR(port.e_bnd(0), c, 1e-15);
  EXPECT_NEAR(port.e_bnd(1), 0.0, 1e-15);
}

TEST(BoundaryPort, ZeroTracesGiveZeroPort) {
  const auto port = core::boundary_port(VectorXd::Zero(2), VectorXd::Zero(2), channel());
  EXPECT_EQ(port.f_bnd.norm(), 0.0);
  EXPECT_EQ(port.e_bnd.norm(), 0.0);
}

TEST(BoundaryPort, EqualTracesCancelFlow) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  MatrixXd a(3, 3);
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n01(rng);
  const MatrixXd p1 = a + a.transpose();
  const core::StructureMatrices s(p1, MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 3));
  const VectorXd v = VectorXd::Random(3);
  const auto port = core::boundary_port(v, v, s);
  EXPECT_LT(port.f_bnd.norm(), 1e-14);
  EXPECT_LT((port.e_bnd - std::sqrt(2.0) * v).norm(), 1e-14);
}

TEST(IoMatrices, ScalarHandChecks) {
  core::BoundaryIoMatrices good{row({1, 0}), row({0, 1})};
  const auto r = core::validate_io_matrices(good);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.w_sigma_w, 0.0, 1e-15);
  EXPECT_NEAR(r.w_sigma_wt_minus_i, 0.0, 1e-15);

  core::BoundaryIoMatrices bad{row({1, 1}), row({0, 1})};
  const auto rb = core::validate_io_matrices(bad);
  EXPECT_FALSE(rb.pass);
  EXPECT_NEAR(rb.w_sigma_w, 2.0, 1e-15);
}

TEST(IoMatrices, ScalarSelectorsReadPort) {
  core::BoundaryIoMatrices m{row({1, 0}), row({0, 1})};
  core::BoundaryPort port{VectorXd::Constant(1, 3.0), VectorXd::Constant(1, 5.0)};
  const auto [u, y] = core::boundary_io(port, m);
  EXPECT_DOUBLE_EQ(u(0), 3.0);
  EXPECT_DOUBLE_EQ(y(0), 5.0);
  const auto [u0, y0] = core::boundary_io(core::BoundaryPort{VectorXd::Zero(1), VectorXd::Zero(1)}, m);
  EXPECT_EQ(u0(0), 0.0);
  EXPECT_EQ(y0(0), 0.0);
}

TEST(IoMatrices, ChannelControlPairMatchesHandWrittenMatrices) {
  const auto s = channel(0.5);
  const auto inputs = swe::control_inputs();
  const auto m = core::io_matrices_from_traces(s, inputs);
  const auto ref = swe::explicit_io_matrices();
  EXPECT_LT((m.w - ref.w).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((m.w_tilde - ref.w_tilde).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(core::validate_io_matrices(m).pass);
  EXPECT_TRUE(core::validate_io_matrices(ref).pass);
}

TEST(IoMatrices, ClosedGatePairIsValid) {
  const auto m = core::io_matrices_from_traces(channel(), swe::closed_gate_inputs());
  EXPECT_TRUE(core::validate_io_matrices(m).pass);
}

TEST(IoMatrices, NonIsotropicSelectionIsRejected) {
  // Q(0) and P(0) together do not form a Lagrangian selection.
  const std::vector<core::TraceSelector> sel = {{BoundaryEnd::kA, 0}, {BoundaryEnd::kA, 1}};
  EXPECT_THROW(core::io_matrices_from_traces(channel(), sel), Error);
}

TEST(IoMatrices, ChannelRestStateInputs) {
  // q = 1, p = 0: u = (Q(0), P(L)) with P = p^2/2 + g q, Q = q p - (p - 5) exp(-(p - 5)^2).
  swe::SweParams params;
  const auto s = swe::structure(params);
  const auto [pb, qb] = swe::true_co_energy(1.0, 0.0, params);
  VectorXd e(2);
  e << pb, qb;
  const auto port = core::boundary_port(e, e, s);
  const auto [u, y] = core::boundary_io(port, core::io_matrices_from_traces(s, swe::control_inputs()));
  EXPECT_NEAR(u(0), 5.0 * std::exp(-25.0), 1e-20);
  EXPECT_NEAR(u(0), 6.94e-11, 1e-13);
  EXPECT_NEAR(u(1), 9.81, 1e-13);
  EXPECT_NEAR(y(0), 9.81, 1e-13);
  EXPECT_NEAR(y(1), -u(0), 1e-20);
  const double h = 1e-6;
  const double fd = (swe::true_density(1.0, h, params) - swe::true_density(1.0, -h, params)) / (2 * h);
  EXPECT_NEAR(u(0), fd, 1e-9);
}

TEST(StructureOperator, ConstantFieldWithoutZerothOrderVanishes) {
  core::SpatialGrid g(0.0, 1.0, 11);
  const MatrixXd e = MatrixXd::Constant(11, 2, 3.5);
  EXPECT_LT(core::apply_structure_operator(e, channel(), g).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StructureOperator, LinearFieldExact) {
  core::SpatialGrid g(0.0, 1.0, 11);
  MatrixXd e = MatrixXd::Zero(11, 2);
  e.col(0) = g.nodes();
  for (auto scheme : {core::DerivativeScheme::kSecondOrderOneSided, core::DerivativeScheme::kSummationByParts}) {
    const MatrixXd out = core::apply_structure_operator(e, channel(), g, scheme);
    EXPECT_LT(out.col(0).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((out.col(1).array() + 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(StructureOperator, SineFieldMatchesAnalyticDerivative) {
  core::SpatialGrid g(0.0, 1.0, 101);
  MatrixXd e = MatrixXd::Zero(101, 2);
  e.col(0) = g.nodes().array().sin();
  const MatrixXd out = core::apply_structure_operator(e, channel(), g);
  const VectorXd ref = -g.nodes().array().cos();
  EXPECT_LT(out.col(0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((out.col(1) - ref).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(StructureOperator, SecondOrderClosureExactOnQuadratics) {
  core::SpatialGrid g(0.0, 2.0, 9);
  const VectorXd z = g.nodes();
  const MatrixXd d = core::spatial_derivative(z.array().square().matrix(), g);
  EXPECT_LT((d.col(0) - 2.0 * z).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StructureOperator, SummationByPartsIdentity) {
  // w_j-weighted D satisfies u^T W D v + (D u)^T W v = u_N v_N - u_0 v_0.
  core::SpatialGrid g(0.0, 1.0, 17);
  const MatrixXd d = core::derivative_matrix(g, core::DerivativeScheme::kSummationByParts);
  const VectorXd w = Eigen::Map<const VectorXd>(g.weights().data(), 17);
  const MatrixXd q = w.asDiagonal() * d;
  MatrixXd bnd = MatrixXd::Zero(17, 17);
  bnd(0, 0) = -1.0;
  bnd(16, 16) = 1.0;
  EXPECT_LT((q + q.transpose() - bnd).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StructureOperator, StackedMatrixAgreesWithFieldForm) {
  core::SpatialGrid g(0.0, 1.0, 7);
  MatrixXd p0(2, 2);
  p0 << 0, 0.3, -0.3, 0;
  MatrixXd g0(2, 2);
  g0 << 0.2, 0, 0, 0.7;
  MatrixXd p1(2, 2);
  p1 << 0, -1, -1, 0;
  const core::StructureMatrices s(p1, p0, g0);
  const MatrixXd e = MatrixXd::Random(7, 2);
  const VectorXd lhs = core::structure_operator_matrix(s, g) * core::stack_point_major(e);
  const MatrixXd rhs = core::apply_structure_operator(e, s, g);
  EXPECT_LT((core::unstack_point_major(lhs, 2) - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DissipatedPower, CasesWithClosedForms) {
  core::SpatialGrid g(0.0, 2.0, 21);
  EXPECT_EQ(core::dissipated_power(MatrixXd::Random(21, 2), channel(0.0), g), 0.0);
  MatrixXd e(21, 2);
  e.col(0).setConstant(7.0);
  e.col(1).setConstant(0.3);
  EXPECT_NEAR(core::dissipated_power(e, channel(0.5), g), 0.5 * 0.09 * 2.0, 1e-14);

  core::SpatialGrid gp(0.0, std::numbers::pi, 201);
  MatrixXd es = MatrixXd::Zero(201, 2);
  es.col(1) = gp.nodes().array().sin();
  EXPECT_NEAR(core::dissipated_power(es, channel(1.0), gp), std::numbers::pi / 2.0, 1e-4);
}

TEST(Density, HamiltonianIsTrapezoidIntegral) {
  swe::SweParams params;
  const auto g = swe::grid(params, 11);
  const swe::SweDensity h(params);
  const auto x = swe::uniform_state(g, 1.0, 0.0);
  EXPECT_NEAR(core::hamiltonian(h, x), swe::true_density(1.0, 0.0, params), 1e-14);
  const MatrixXd e = core::co_energy_field(h, x);
  EXPECT_NEAR(e(3, 0), 9.81, 1e-14);
}

TEST(Density, CoEnergyInversionRoundTrip) {
  swe::SweParams params;
  const swe::SweDensity h(params);
  VectorXd x(2);
  x << 1.3, 0.4;
  const VectorXd target = h.gradient(x);
  core::CoEnergyInversionOptions opts;
  opts.positive_component = 0;
  const VectorXd sol = core::invert_co_energy(h, target, Eigen::Vector2d(1.0, 0.0), opts);
  EXPECT_LT((sol - x).norm(), 1e-10);
}

TEST(Density, CoEnergyInversionReportsFailure) {
  swe::SweParams params;
  const swe::SweDensity h(params);
  core::CoEnergyInversionOptions opts;
  opts.positive_component = 0;
  opts.max_iterations = 3;
  EXPECT_THROW(core::invert_co_energy(h, Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(1.0, 0.0), opts),
               ConvergenceError);
}

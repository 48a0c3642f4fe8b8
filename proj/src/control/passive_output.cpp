// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/control/passive_output.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"

namespace gpdphs::control {

namespace {

std::vector<Eigen::VectorXd> correction_directions(const CasimirSpec& cs, const ControllerPhs& c) {
  if (cs.n_c() != c.n_c()) {
    throw DimensionError("Casimir Gamma and controller have different n_c");
  }
  std::vector<Eigen::VectorXd> v;
  for (Eigen::Index i = 0; i < cs.gamma().cols(); ++i) {
    v.emplace_back(c.g_c().transpose() * cs.gamma().col(i));
    if (v.back().norm() < 1e-14) {
      throw InvariantError(fmt::format("G_c^T Gamma_{} = 0: singular Casimir configuration", i + 1));
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (std::abs(v[i].dot(v[j])) > 1e-12 * v[i].norm() * v[j].norm()) {
        throw InvariantError("G_c^T Gamma columns must be mutually orthogonal");
      }
    }
  }
  return v;
}

double g0_inner(const Eigen::MatrixXd& a, const Eigen::Ref<const Eigen::MatrixXd>& b, const core::StructureMatrices& s,
                const core::SpatialGrid& grid) {
  const Eigen::VectorXd integrand = ((a * s.g0()).array() * b.array()).rowwise().sum();
  return core::integrate(grid, integrand);
}

}  // namespace

PassiveOutputConfig compute_S(const CasimirSpec& cs, const ControllerPhs& c, const core::StructureMatrices& s,
                              const core::SpatialGrid& grid, const Eigen::Ref<const Eigen::MatrixXd>& s_prime) {
  const auto nc = static_cast<Eigen::Index>(c.n_c());
  if (s_prime.rows() != nc || s_prime.cols() != nc) {
    throw DimensionError("S' must be n_c x n_c");
  }
  if ((s_prime - s_prime.transpose()).norm() > 1e-12) {
    throw InvariantError("S' must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s_prime, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw InvariantError("S' must be positive semidefinite");
  }
  const auto v = correction_directions(cs, c);
  Eigen::MatrixXd sm = s_prime;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double ci = g0_inner(cs.variational()[i], cs.variational()[i], s, grid);
    sm += v[i] * ci * v[i].transpose() / std::pow(v[i].squaredNorm(), 2);
  }
  return PassiveOutputConfig{sm, s_prime};
}

Eigen::VectorXd passive_output(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& u,
                               const Eigen::Ref<const Eigen::MatrixXd>& e_field, const CasimirSpec& cs,
                               const ControllerPhs& c, const core::StructureMatrices& s,
                               const PassiveOutputConfig& poc, const core::SpatialGrid& grid) {
  if (y.size() != u.size() || poc.s_matrix.rows() != y.size()) {
    throw DimensionError("passive output: y, u and S sizes differ");
  }
  const auto v = correction_directions(cs, c);
  Eigen::VectorXd ybar = y + poc.s_matrix * u;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ybar += 2.0 * v[i] / v[i].squaredNorm() * g0_inner(cs.variational()[i], e_field, s, grid);
  }
  return ybar;
}

Eigen::VectorXd passive_output(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& u,
                               const core::StateField& state, const core::DensityModel& model,
                               const CasimirSpec& cs, const ControllerPhs& c, const core::StructureMatrices& s,
                               const PassiveOutputConfig& poc) {
  return passive_output(y, u, core::co_energy_field(model, state), cs, c, s, poc, state.grid());
}

MatchingReport check_matching_conditions(const CasimirSpec& cs, const ControllerPhs& c,
                                         const PassiveOutputConfig& poc, const core::StructureMatrices& s,
                                         const core::BoundaryIoMatrices& m) {
  const Eigen::MatrixXd rt = core::boundary_port_map(s) * cs.boundary_traces();
  const Eigen::MatrixXd& gc = c.g_c();
  MatchingReport rep;
  rep.residual_dynamics =
      ((c.j_c() + gc * poc.s_matrix * gc.transpose()) * cs.gamma() + gc * m.w_tilde * rt).norm();
  rep.residual_input = (gc.transpose() * cs.gamma() + m.w * rt).norm();
  rep.pass = rep.residual_dynamics < kMatchingTolerance && rep.residual_input < kMatchingTolerance;
  return rep;
}

}  // namespace gpdphs::control

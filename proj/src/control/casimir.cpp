// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/control/casimir.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"

namespace gpdphs::control {

CasimirSpec::CasimirSpec(Eigen::MatrixXd gamma, std::vector<Eigen::MatrixXd> variational, core::SpatialGrid grid)
    : gamma_(std::move(gamma)), variational_(std::move(variational)), grid_(std::move(grid)) {
  if (variational_.empty() || static_cast<std::size_t>(gamma_.cols()) != variational_.size()) {
    throw DimensionError(fmt::format("Gamma has {} columns for {} Casimir fields", gamma_.cols(),
                                     variational_.size()));
  }
  for (const auto& v : variational_) {
    if (static_cast<std::size_t>(v.rows()) != grid_.n_points() || v.cols() != variational_.front().cols()) {
      throw DimensionError("Casimir variational fields must all be n_points x n");
    }
  }
}

Eigen::MatrixXd CasimirSpec::psi_weights() const {
  const auto n_pts = static_cast<Eigen::Index>(grid_.n_points());
  const auto dim = static_cast<Eigen::Index>(n());
  Eigen::MatrixXd w(static_cast<Eigen::Index>(count()), n_pts * dim);
  const auto& qw = grid_.weights();
  for (std::size_t i = 0; i < count(); ++i) {
    for (Eigen::Index j = 0; j < n_pts; ++j) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        w(static_cast<Eigen::Index>(i), j * dim + k) = qw[static_cast<std::size_t>(j)] * variational_[i](j, k);
      }
    }
  }
  return w;
}

Eigen::MatrixXd CasimirSpec::boundary_traces() const {
  const auto dim = static_cast<Eigen::Index>(n());
  const Eigen::Index last = static_cast<Eigen::Index>(grid_.n_points()) - 1;
  Eigen::MatrixXd t(2 * dim, static_cast<Eigen::Index>(count()));
  for (std::size_t i = 0; i < count(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    t.col(c).head(dim) = variational_[i].row(last).transpose();
    t.col(c).tail(dim) = variational_[i].row(0).transpose();
  }
  return t;
}

CasimirPdeReport check_casimir_pde(const CasimirSpec& cs, const core::StructureMatrices& s,
                                   const core::SpatialGrid& grid) {
  CasimirPdeReport rep;
  for (const auto& v : cs.variational()) {
    const Eigen::MatrixXd r = core::apply_structure_operator(v, s, grid);
    const double m = r.cwiseAbs().maxCoeff();
    rep.residuals.push_back(m);
    rep.max_residual = std::max(rep.max_residual, m);
  }
  rep.pass = rep.max_residual < kCasimirPdeTolerance;
  return rep;
}

Eigen::VectorXd psi_values(const CasimirSpec& cs, const core::StateField& state) {
  if (state.n() != cs.n() || !(state.grid() == cs.grid())) {
    throw DimensionError("state does not match the Casimir grid");
  }
  Eigen::VectorXd psi(static_cast<Eigen::Index>(cs.count()));
  for (std::size_t i = 0; i < cs.count(); ++i) {
    const Eigen::VectorXd integrand = (cs.variational()[i].array() * state.values().array()).rowwise().sum();
    psi(static_cast<Eigen::Index>(i)) = core::integrate(cs.grid(), integrand);
  }
  return psi;
}

Eigen::VectorXd casimir_values(const CasimirSpec& cs, const core::StateField& state,
                               const Eigen::Ref<const Eigen::VectorXd>& x_c) {
  if (static_cast<std::size_t>(x_c.size()) != cs.n_c()) {
    throw DimensionError("controller state size does not match Gamma");
  }
  return cs.gamma().transpose() * x_c + psi_values(cs, state);
}

}  // namespace gpdphs::control

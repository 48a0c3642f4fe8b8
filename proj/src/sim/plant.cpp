// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/sim/plant.hpp"

#include <algorithm>
#include <utility>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"

namespace gpdphs::sim {

BoundaryCoupling::BoundaryCoupling(const core::StructureMatrices& s, std::vector<core::TraceSelector> inputs)
    : p1_(s.p1()), inputs_(std::move(inputs)), io_(core::io_matrices_from_traces(s, inputs_)), s_(s) {
  const auto n = static_cast<Eigen::Index>(s.n());
  for (const auto end : {core::BoundaryEnd::kA, core::BoundaryEnd::kB}) {
    Eigen::MatrixXd pins = Eigen::MatrixXd::Zero(n, n);
    for (const auto& sel : inputs_) {
      if (sel.end == end) {
        pins(static_cast<Eigen::Index>(sel.component), static_cast<Eigen::Index>(sel.component)) = 1.0;
      }
    }
    const Eigen::MatrixXd p1e = p1_ * pins;
    if ((0.5 * (p1e + p1e.transpose()) - 0.5 * p1_).norm() > 1e-12) {
      throw InvariantError(
          "weak boundary coupling needs the inputs at each end to carry exactly half of the boundary power");
    }
  }
}

void BoundaryCoupling::apply(const Eigen::Ref<const Eigen::MatrixXd>& e, const Eigen::Ref<const Eigen::VectorXd>& u,
                             const core::SpatialGrid& grid, Eigen::MatrixXd& xdot) const {
  const Eigen::Index last = e.rows() - 1;
  const double w0 = grid.weights().front();
  const double wn = grid.weights().back();
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(inputs_[i].component);
    const double ui = u(static_cast<Eigen::Index>(i));
    if (inputs_[i].end == core::BoundaryEnd::kA) {
      xdot.row(0) += (p1_.col(c) * ((e(0, c) - ui) / w0)).transpose();
    } else {
      xdot.row(last) -= (p1_.col(c) * ((e(last, c) - ui) / wn)).transpose();
    }
  }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> BoundaryCoupling::io_from_traces(
    const Eigen::Ref<const Eigen::MatrixXd>& e) const {
  const Eigen::Index last = e.rows() - 1;
  const auto port = core::boundary_port(e.row(last).transpose(), e.row(0).transpose(), s_);
  return core::boundary_io(port, io_);
}

PlantEval plant_rhs(const Plant& plant, const Eigen::Ref<const Eigen::MatrixXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& u) {
  PlantEval out;
  const auto& v = x;
  out.e.resize(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < v.rows(); ++j) {
    out.e.row(j) = plant.density->gradient(v.row(j).transpose()).transpose();
  }
  out.xdot = core::apply_structure_operator(out.e, plant.structure, plant.grid,
                                            core::DerivativeScheme::kSummationByParts);
  plant.coupling.apply(out.e, u, plant.grid, out.xdot);
  out.y = plant.coupling.io_from_traces(out.e).second;
  return out;
}

double characteristic_speed(const Plant& plant, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  double speed = 0.0;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const Eigen::MatrixXd a = plant.structure.p1() * plant.density->hessian(x.row(j).transpose());
    const Eigen::EigenSolver<Eigen::MatrixXd> eig(a, false);
    speed = std::max(speed, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return speed;
}

void guard_state(const Plant& plant, const Eigen::Ref<const Eigen::MatrixXd>& x, double t) {
  if (!x.allFinite()) {
    throw SimulationError(fmt::format("state became non-finite at t = {:.6g} s", t));
  }
  if (plant.positive_component) {
    const double m = x.col(static_cast<Eigen::Index>(*plant.positive_component)).minCoeff();
    if (m < plant.positivity_floor) {
      throw SimulationError(fmt::format("dry channel: min of component {} is {:.3e} at t = {:.6g} s",
                                        *plant.positive_component, m, t));
    }
  }
}

}  // namespace gpdphs::sim

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/core/boundary.hpp"
#include "gpdphs/core/density.hpp"
#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/structure.hpp"

namespace gpdphs::sim {

/// Weak (penalty) imposition of trace-selected boundary inputs.
///
/// Input i sets co-energy component c at one end. The semi-discrete rate
/// term added at that node is -/+ P1 e_c (e_c(end) - u_i) / w_end, which
/// makes the discrete energy balance dH/dt = -sum w e^T G0 e + y^T u exact.
class BoundaryCoupling {
 public:
  BoundaryCoupling(const core::StructureMatrices& s, std::vector<core::TraceSelector> inputs);

  const std::vector<core::TraceSelector>& inputs() const { return inputs_; }
  const core::BoundaryIoMatrices& io() const { return io_; }

  /// Adds the boundary penalty terms to xdot.
  void apply(const Eigen::Ref<const Eigen::MatrixXd>& e, const Eigen::Ref<const Eigen::VectorXd>& u,
             const core::SpatialGrid& grid, Eigen::MatrixXd& xdot) const;

  /// (u_traces, y) read from the co-energy field through W and Wt.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> io_from_traces(const Eigen::Ref<const Eigen::MatrixXd>& e) const;

 private:
  Eigen::MatrixXd p1_;
  std::vector<core::TraceSelector> inputs_;
  core::BoundaryIoMatrices io_;
  core::StructureMatrices s_;
};

/// Plant = structure + density + boundary coupling (+ optional positivity guard).
struct Plant {
  core::StructureMatrices structure;
  core::SpatialGrid grid;
  std::shared_ptr<const core::DensityModel> density;
  BoundaryCoupling coupling;
  /// Component that must stay above `positivity_floor` (water level).
  std::optional<std::size_t> positive_component;
  double positivity_floor = 1e-6;
};

struct PlantEval {
  Eigen::MatrixXd e;     // co-energy field
  Eigen::MatrixXd xdot;  // state rate
  Eigen::VectorXd y;     // boundary output
};

/// Method-of-lines right-hand side at state values x (n_points x n).
PlantEval plant_rhs(const Plant& plant, const Eigen::Ref<const Eigen::MatrixXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& u);

/// Largest |eigenvalue| of P1 * hessian over the nodes.
double characteristic_speed(const Plant& plant, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Throws SimulationError for non-finite values or a violated positivity guard.
void guard_state(const Plant& plant, const Eigen::Ref<const Eigen::MatrixXd>& x, double t);

}  // namespace gpdphs::sim

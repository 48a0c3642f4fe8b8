// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include <Eigen/Dense>

#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/structure.hpp"

namespace gpdphs::control {

/// Constants of the energy-decrement bound
///   dH_d/dt <= -(lambda - eps/2) |e|^2 + eta_bar^2 / (2 eps).
struct RobustnessLedger {
  double lambda = 0.0;
  double epsilon = 0.0;
  double eta_bar = 0.0;
  double confidence = 0.95;

  double decrement_coeff() const { return lambda - 0.5 * epsilon; }
  double offset() const { return eta_bar * eta_bar / (2.0 * epsilon); }
};

/// Smallest eigenvalue of G0 on its range (0 if G0 = 0).
double coercivity_on_range(const core::StructureMatrices& s);

/// Ledger with lambda from coercivity_on_range and eps = lambda unless given.
/// Throws ConfigError when eps is outside (0, 2 lambda).
RobustnessLedger make_ledger(const core::StructureMatrices& s, double eta_bar, double confidence,
                             std::optional<double> epsilon = std::nullopt);

/// -(lambda - eps/2) e_norm_sq + eta_bar^2 / (2 eps).
double prop3_decrement(const RobustnessLedger& r, double e_field_norm_sq);

/// |e|^2 measured through the G0 seminorm: (1/lambda) integral of e^T G0 e.
double g0_scaled_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& e_field, const core::StructureMatrices& s,
                         const core::SpatialGrid& grid, double lambda);

}  // namespace gpdphs::control

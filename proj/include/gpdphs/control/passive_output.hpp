// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "gpdphs/control/casimir.hpp"
#include "gpdphs/control/controller.hpp"
#include "gpdphs/core/boundary.hpp"
#include "gpdphs/core/density.hpp"

namespace gpdphs::control {

struct PassiveOutputConfig {
  Eigen::MatrixXd s_matrix;
  Eigen::MatrixXd s_prime;
};

/// S = sum_i v_i c_i v_i^T / |v_i|^4 + S', with v_i = G_c^T Gamma_i and
/// c_i = integral of dPsi_i^T G0 dPsi_i. The v_i must be nonzero and
/// mutually orthogonal.
PassiveOutputConfig compute_S(const CasimirSpec& cs, const ControllerPhs& c, const core::StructureMatrices& s,
                              const core::SpatialGrid& grid, const Eigen::Ref<const Eigen::MatrixXd>& s_prime);

/// ybar = y + S u + sum_i 2 v_i / |v_i|^2 * integral of dPsi_i^T G0 e, with e
/// the co-energy field of the model the controller was designed from.
Eigen::VectorXd passive_output(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& u,
                               const Eigen::Ref<const Eigen::MatrixXd>& e_field, const CasimirSpec& cs,
                               const ControllerPhs& c, const core::StructureMatrices& s,
                               const PassiveOutputConfig& poc, const core::SpatialGrid& grid);

Eigen::VectorXd passive_output(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& u,
                               const core::StateField& state, const core::DensityModel& model,
                               const CasimirSpec& cs, const ControllerPhs& c, const core::StructureMatrices& s,
                               const PassiveOutputConfig& poc);

struct MatchingReport {
  double residual_dynamics = 0.0;  // ||(J_c + G_c S G_c^T) Gamma + G_c Wt R trace||
  double residual_input = 0.0;     // ||G_c^T Gamma + W R trace||
  bool pass = false;
};

constexpr double kMatchingTolerance = 1e-8;

MatchingReport check_matching_conditions(const CasimirSpec& cs, const ControllerPhs& c,
                                         const PassiveOutputConfig& poc, const core::StructureMatrices& s,
                                         const core::BoundaryIoMatrices& m);

}  // namespace gpdphs::control

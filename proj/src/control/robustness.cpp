// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/control/robustness.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"

namespace gpdphs::control {

double coercivity_on_range(const core::StructureMatrices& s) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.g0(), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  double lam = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double v = eig.eigenvalues()(i);
    if (v > 1e-12 * scale) {
      lam = std::min(lam, v);
    }
  }
  return std::isfinite(lam) ? lam : 0.0;
}

static void check_epsilon(const RobustnessLedger& r) {
  if (!(r.epsilon > 0.0) || !(r.epsilon < 2.0 * r.lambda)) {
    throw ConfigError(fmt::format("epsilon = {} must lie in (0, 2 lambda) = (0, {})", r.epsilon, 2.0 * r.lambda));
  }
  if (!(r.eta_bar >= 0.0) || !std::isfinite(r.eta_bar)) {
    throw ConfigError(fmt::format("eta_bar must be finite and non-negative, got {}", r.eta_bar));
  }
}

RobustnessLedger make_ledger(const core::StructureMatrices& s, double eta_bar, double confidence,
                             std::optional<double> epsilon) {
  RobustnessLedger r;
  r.lambda = coercivity_on_range(s);
  r.epsilon = epsilon.value_or(r.lambda);
  r.eta_bar = eta_bar;
  r.confidence = confidence;
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError(fmt::format("confidence must lie in (0, 1), got {}", confidence));
  }
  check_epsilon(r);
  return r;
}

double prop3_decrement(const RobustnessLedger& r, double e_field_norm_sq) {
  check_epsilon(r);
  return -r.decrement_coeff() * e_field_norm_sq + r.offset();
}

double g0_scaled_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& e_field, const core::StructureMatrices& s,
                         const core::SpatialGrid& grid, double lambda) {
  if (!(lambda > 0.0)) {
    throw ConfigError("g0_scaled_norm_sq needs lambda > 0");
  }
  return core::dissipated_power(e_field, s, grid) / lambda;
}

}  // namespace gpdphs::control

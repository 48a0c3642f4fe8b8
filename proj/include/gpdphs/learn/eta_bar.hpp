// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "gpdphs/core/density.hpp"
#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/structure.hpp"
#include "gpdphs/learn/hamiltonian.hpp"

namespace gpdphs::learn {

/// Per-component admissible state box.
struct DomainBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const;
};

struct UncertaintyBound {
  double eta_bar = 0.0;
  double confidence = 0.95;
  DomainBox domain_box;
  std::string mode;
  /// Largest observed norm before the margin (oracle) or the unscaled
  /// gradient std (deployment).
  double raw_max = 0.0;
  std::size_t fields_evaluated = 0;
};

struct OracleSweepOptions {
  /// Endpoint levels per component; every pair of levels defines one affine profile.
  std::size_t levels = 6;
  double margin = 1.1;
};

/// eta(x) = (P1 d/dz + P0 - G0)(grad h_true - grad h_model), swept over
/// affine fields with endpoints on a level grid of the box; returns
/// margin * max ||eta||_L2.
UncertaintyBound estimate_eta_bar_oracle(const core::DensityModel& model, const core::DensityModel& truth,
                                         const core::StructureMatrices& s, const core::SpatialGrid& grid,
                                         const DomainBox& box, double confidence,
                                         const OracleSweepOptions& opts = {});

struct DeploymentOptions {
  std::size_t n_samples = 256;
  std::uint64_t seed = 0;
};

/// beta(1 - p) * ||B||_W * max_x sqrt(lambda_max(cov grad mu(x))) * sqrt(b - a),
/// with beta the two-sided standard-normal quantile, ||B||_W the operator
/// norm in the trapezoid-weighted L2 inner product and the maximum taken over
/// a Latin-hypercube sample of the box.
UncertaintyBound estimate_eta_bar_deployment(const LearnedHamiltonian& lh, const core::StructureMatrices& s,
                                             const core::SpatialGrid& grid, const DomainBox& box,
                                             double confidence, const DeploymentOptions& opts = {});

/// Two-sided standard-normal quantile, Phi^-1(1 - p/2) with p = 1 - confidence.
double confidence_quantile(double confidence);

}  // namespace gpdphs::learn

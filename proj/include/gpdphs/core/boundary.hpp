// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/core/structure.hpp"

namespace gpdphs::core {

struct BoundaryPort {
  Eigen::VectorXd f_bnd;
  Eigen::VectorXd e_bnd;
};

/// (f; e) = 1/sqrt(2) [[P1, -P1], [I, I]] (e(b); e(a)).
BoundaryPort boundary_port(const Eigen::Ref<const Eigen::VectorXd>& e_at_b,
                           const Eigen::Ref<const Eigen::VectorXd>& e_at_a,
                           const StructureMatrices& s);

/// The 2n x 2n map R taking (e(b); e(a)) to (f; e).
Eigen::MatrixXd boundary_port_map(const StructureMatrices& s);

/// Sigma = [[0, I], [I, 0]].
Eigen::MatrixXd port_pairing(std::size_t n);

struct BoundaryIoMatrices {
  Eigen::MatrixXd w;
  Eigen::MatrixXd w_tilde;
};

struct IoValidationReport {
  double w_sigma_w = 0.0;           // ||W S W^T||
  double w_sigma_wt_minus_i = 0.0;  // ||W S Wt^T - I||
  double wt_sigma_wt = 0.0;         // ||Wt S Wt^T||
  Eigen::Index rank_w = 0;
  Eigen::Index rank_w_tilde = 0;
  double stacked_min_singular = 0.0;
  bool pass_rank = false;
  bool shape_ok = false;
  bool pass = false;

  std::vector<std::pair<std::string, bool>> checks() const;
};

constexpr double kIoTolerance = 1e-10;

IoValidationReport validate_io_matrices(const BoundaryIoMatrices& m);

/// u = W (f; e), y = Wt (f; e).
std::pair<Eigen::VectorXd, Eigen::VectorXd> boundary_io(const BoundaryPort& port,
                                                        const BoundaryIoMatrices& m);

enum class BoundaryEnd { kA, kB };

/// One input channel: the co-energy component `component` evaluated at `end`.
struct TraceSelector {
  BoundaryEnd end;
  std::size_t component;
};

/// Builds (W, Wt) whose input u_i is the selected co-energy trace. Requires
/// an invertible P1 and a selection that is isotropic for the boundary
/// pairing; Wt is the conjugate output closest to the selection.
BoundaryIoMatrices io_matrices_from_traces(const StructureMatrices& s,
                                           std::span<const TraceSelector> inputs);

}  // namespace gpdphs::core

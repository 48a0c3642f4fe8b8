// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "gpdphs/core/grid.hpp"
#include "gpdphs/core/structure.hpp"

namespace gpdphs::core {

enum class DerivativeScheme {
  /// Central interior, second-order one-sided endpoints.
  kSecondOrderOneSided,
  /// Central interior, first-order one-sided endpoints. Together with the
  /// trapezoid weights this satisfies summation by parts exactly.
  kSummationByParts,
};

/// d/dz of every column of f (rows are grid nodes).
Eigen::MatrixXd spatial_derivative(const Eigen::Ref<const Eigen::MatrixXd>& f, const SpatialGrid& grid,
                                   DerivativeScheme scheme = DerivativeScheme::kSecondOrderOneSided);

/// Dense n_points x n_points matrix of spatial_derivative.
Eigen::MatrixXd derivative_matrix(const SpatialGrid& grid,
                                  DerivativeScheme scheme = DerivativeScheme::kSecondOrderOneSided);

/// (P1 d/dz + P0 - G0) e, evaluated per node. e_field is n_points x n.
Eigen::MatrixXd apply_structure_operator(const Eigen::Ref<const Eigen::MatrixXd>& e_field,
                                         const StructureMatrices& s, const SpatialGrid& grid,
                                         DerivativeScheme scheme = DerivativeScheme::kSecondOrderOneSided);

/// The same operator on point-major stacked vectors (index j * n + k).
Eigen::MatrixXd structure_operator_matrix(const StructureMatrices& s, const SpatialGrid& grid,
                                          DerivativeScheme scheme = DerivativeScheme::kSecondOrderOneSided);

/// Trapezoid rule of e^T G0 e.
double dissipated_power(const Eigen::Ref<const Eigen::MatrixXd>& e_field, const StructureMatrices& s,
                        const SpatialGrid& grid);

Eigen::VectorXd stack_point_major(const Eigen::Ref<const Eigen::MatrixXd>& field);
Eigen::MatrixXd unstack_point_major(const Eigen::Ref<const Eigen::VectorXd>& stacked, std::size_t n);

}  // namespace gpdphs::core

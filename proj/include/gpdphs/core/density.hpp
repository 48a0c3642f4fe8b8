// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "gpdphs/core/structure.hpp"

namespace gpdphs::core {

/// Pointwise Hamiltonian density h(x). Its gradient is the co-energy
/// (variational derivative) of H = integral of h.
class DensityModel {
 public:
  virtual ~DensityModel() = default;

  virtual std::size_t dim() const = 0;
  virtual double density(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
};

/// H(x) = integral of the density over the grid (trapezoid).
double hamiltonian(const DensityModel& model, const StateField& state);

/// Per-node gradient of the density, n_points x n.
Eigen::MatrixXd co_energy_field(const DensityModel& model, const StateField& state);

struct CoEnergyInversionOptions {
  int max_iterations = 100;
  double tolerance = 1e-12;
  /// Component kept strictly above `floor` by step halving.
  std::optional<std::size_t> positive_component;
  double floor = 1e-9;
};

/// Solves gradient(x) = target by damped Newton from x0. Throws
/// ConvergenceError if the residual is not below tolerance in time.
Eigen::VectorXd invert_co_energy(const DensityModel& model, const Eigen::Ref<const Eigen::VectorXd>& target,
                                 const Eigen::Ref<const Eigen::VectorXd>& x0,
                                 const CoEnergyInversionOptions& opts = {});

}  // namespace gpdphs::core

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/gp/kernel.hpp"
#include "gpdphs/sim/simulator.hpp"

namespace gpdphs::learn {

/// Sampled states x(t_i, z_j) and inputs u(t_i).
struct ObservationSet {
  Eigen::VectorXd times;                 // N_t
  Eigen::VectorXd points;                // N_z
  std::vector<Eigen::MatrixXd> states;   // N_t entries, each N_z x n
  Eigen::MatrixXd inputs;                // N_t x n

  std::size_t n_t() const { return static_cast<std::size_t>(times.size()); }
  std::size_t n_z() const { return static_cast<std::size_t>(points.size()); }
  std::size_t n() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().cols()); }
  void validate(double a, double b) const;
};

struct SamplingOptions {
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

/// Simulates the plant and samples it at (t_i, z_j). Sample times are
/// snapped to the nearest step; states between nodes are linearly
/// interpolated.
ObservationSet collect_observations(const sim::Plant& plant, const core::StateField& initial,
                                    const sim::InputSignal& excitation, const sim::SimConfig& cfg,
                                    const Eigen::Ref<const Eigen::VectorXd>& sample_times,
                                    const Eigen::Ref<const Eigen::VectorXd>& sample_points,
                                    const SamplingOptions& opts = {});

/// Stacked states and time derivatives, point-major per time instant.
struct AugmentedDataset {
  Eigen::MatrixXd stacked_states;  // N_t x (N_e n)
  Eigen::MatrixXd stacked_derivs;  // N_t x (N_e n)
  Eigen::VectorXd points;          // N_e upsampled locations
  std::size_t n_e = 0;
};

/// One GP over (t, z) per state component; upsampled states are posterior
/// means and derivatives are d/dt of the posterior mean. `upsample_points`
/// defaults to N_e uniform points spanning the observation points.
AugmentedDataset upsample_and_differentiate(const ObservationSet& obs, std::size_t n_e, const gp::Hyperparams& h,
                                            const Eigen::VectorXd* upsample_points = nullptr);

}  // namespace gpdphs::learn

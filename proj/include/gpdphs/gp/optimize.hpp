// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "gpdphs/gp/kernel.hpp"

namespace gpdphs::gp {

/// Box-bounded objective over log-parameters. When `gradient` is false the
/// minimizer differentiates numerically; `grad` is then always null.
struct LogSpaceProblem {
  std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd* grad)> objective;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  bool gradient = true;
};

struct MinimizeOptions {
  int n_starts = 8;
  std::uint64_t seed = 0;
  int max_iterations = 200;
  /// Random starts are theta0 + U(-spread, spread) per coordinate.
  double start_spread = 1.5;
  double gradient_tolerance = 1e-6;
};

struct MinimizeResult {
  Eigen::VectorXd theta;
  double value = 0.0;
  int evaluations = 0;
};

/// Deterministic multi-start BFGS (GSL vector_bfgs2). Start 0 is theta0
/// itself. Non-finite objective values are treated as +huge; the best finite
/// evaluation seen anywhere is returned, so value <= objective(theta0)
/// whenever that is finite.
MinimizeResult minimize_log_space(const LogSpaceProblem& problem, const Eigen::VectorXd& theta0,
                                  const MinimizeOptions& opts);

struct HyperBounds {
  double sigma_f_min = 1e-6, sigma_f_max = 1e6;
  double length_min = 1e-3, length_max = 1e6;
  double sigma_n_min = 1e-6, sigma_n_max = 10.0;
};

struct OptimizeOptions {
  MinimizeOptions search;
  HyperBounds bounds;
  bool optimize_noise = true;
};

struct OptimizeResult {
  Hyperparams hyper;
  double nlml_init = 0.0;
  double nlml_final = 0.0;
};

/// Minimizes the NLML over log(sigma_f), log(l), log(sigma_n). The returned
/// hyperparameters never have a larger NLML than `init`.
OptimizeResult optimize_hyperparams(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                    const Eigen::Ref<const Eigen::VectorXd>& targets, const Hyperparams& init,
                                    const MeanFunction& prior_mean, const OptimizeOptions& opts = {});

}  // namespace gpdphs::gp

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <memory>

#include <Eigen/Dense>

#include "gpdphs/gp/kernel.hpp"

namespace gpdphs::gp {

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP posterior over scalar targets. Immutable after fit().
class GpPosterior {
 public:
  /// Factorizes K(X,X) + (sigma_n^2 + jitter) I. Throws FactorizationError
  /// when the regularized Gram matrix is not numerically positive definite.
  static GpPosterior fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, Hyperparams hyper,
                         MeanFunction prior_mean);

  std::size_t n_train() const { return static_cast<std::size_t>(inputs_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs_.cols()); }

  /// Variance below zero is clamped to zero and counted.
  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Mean minus the prior mean, i.e. K(x, X) alpha.
  double correction(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Eigen::VectorXd mean_gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd mean_hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Posterior covariance of the gradient of the latent function at x.
  Eigen::MatrixXd gradient_covariance(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const Hyperparams& hyper() const { return hyper_; }
  const MeanFunction& prior_mean() const { return mean_; }
  const Eigen::MatrixXd& chol_factor() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  std::size_t clamped_variance_count() const { return clamp_count_->load(); }

 private:
  GpPosterior() = default;

  /// k(x, X) through the dispatched SIMD row kernel.
  Eigen::VectorXd kernel_row(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Hyperparams hyper_;
  MeanFunction mean_;
  Eigen::MatrixXd scaled_inputs_;  // inputs_ / l, column-major so each dimension is contiguous
  Eigen::VectorXd inv_len2_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  std::shared_ptr<std::atomic<std::size_t>> clamp_count_;
};

/// Lower Cholesky factor of K(X,X) + (sigma_n^2 + jitter) I.
Eigen::MatrixXd regularized_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const Hyperparams& h);

struct NlmlResult {
  double value = 0.0;
  /// d/d log(sigma_f), d/d log(l_k) for each stored length scale, d/d log(sigma_n).
  Eigen::VectorXd log_gradient;
};

double nlml(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const Eigen::Ref<const Eigen::VectorXd>& targets,
            const Hyperparams& h, const MeanFunction& prior_mean);

NlmlResult nlml_with_gradient(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                              const Eigen::Ref<const Eigen::VectorXd>& targets, const Hyperparams& h,
                              const MeanFunction& prior_mean);

}  // namespace gpdphs::gp

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace gpdphs::gp {

/// Jitter always added to the Gram diagonal.
constexpr double kJitter = 1e-8;

/// Squared-exponential hyperparameters. `length_scales` holds either one
/// shared length scale or one per input dimension (ARD).
struct Hyperparams {
  double sigma_f = 1.0;
  Eigen::VectorXd length_scales = Eigen::VectorXd::Ones(1);
  double sigma_n = 0.0;

  static Hyperparams isotropic(double sigma_f, double length, double sigma_n);
  static Hyperparams ard(double sigma_f, Eigen::VectorXd lengths, double sigma_n);

  bool is_isotropic() const { return length_scales.size() == 1; }
  /// Length scale of input dimension k.
  double length(Eigen::Index k) const { return is_isotropic() ? length_scales(0) : length_scales(k); }
  /// Throws InvariantError / DimensionError for invalid values or a mismatched input dimension.
  void validate(std::size_t dim) const;
};

/// k(x, x') = sigma_f^2 exp(-sum_k (x_k - x'_k)^2 / (2 l_k^2)).
double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& x2,
                 const Hyperparams& h);

/// K(A, B), rows are points.
Eigen::MatrixXd kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                              const Eigen::Ref<const Eigen::MatrixXd>& b, const Hyperparams& h);

/// Prior mean with its first two derivatives.
struct MeanFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;

  static MeanFunction zero(std::size_t dim);
  static MeanFunction constant(std::size_t dim, double c);
};

}  // namespace gpdphs::gp

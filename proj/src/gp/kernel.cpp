// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/gp/kernel.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::gp {

Hyperparams Hyperparams::isotropic(double sigma_f, double length, double sigma_n) {
  Hyperparams h;
  h.sigma_f = sigma_f;
  h.length_scales = Eigen::VectorXd::Constant(1, length);
  h.sigma_n = sigma_n;
  return h;
}

Hyperparams Hyperparams::ard(double sigma_f, Eigen::VectorXd lengths, double sigma_n) {
  Hyperparams h;
  h.sigma_f = sigma_f;
  h.length_scales = std::move(lengths);
  h.sigma_n = sigma_n;
  return h;
}

void Hyperparams::validate(std::size_t dim) const {
  if (!(sigma_f > 0.0) || !std::isfinite(sigma_f)) {
    throw InvariantError(fmt::format("sigma_f must be positive and finite, got {}", sigma_f));
  }
  if (!(sigma_n >= 0.0) || !std::isfinite(sigma_n)) {
    throw InvariantError(fmt::format("sigma_n must be non-negative and finite, got {}", sigma_n));
  }
  if (length_scales.size() != 1 && static_cast<std::size_t>(length_scales.size()) != dim) {
    throw DimensionError(
        fmt::format("{} length scales given for input dimension {}", length_scales.size(), dim));
  }
  for (Eigen::Index k = 0; k < length_scales.size(); ++k) {
    if (!(length_scales(k) > 0.0) || !std::isfinite(length_scales(k))) {
      throw InvariantError(fmt::format("length scale {} must be positive, got {}", k, length_scales(k)));
    }
  }
}

double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& x2,
                 const Hyperparams& h) {
  if (x.size() != x2.size()) {
    throw DimensionError("se_kernel: input sizes differ");
  }
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double d = (x(k) - x2(k)) / h.length(k);
    r2 += d * d;
  }
  return h.sigma_f * h.sigma_f * std::exp(-0.5 * r2);
}

Eigen::MatrixXd kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                              const Eigen::Ref<const Eigen::MatrixXd>& b, const Hyperparams& h) {
  if (a.cols() != b.cols()) {
    throw DimensionError("kernel_matrix: input dimensions differ");
  }
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = se_kernel(a.row(i).transpose(), b.row(j).transpose(), h);
    }
  }
  return k;
}

MeanFunction MeanFunction::zero(std::size_t dim) { return constant(dim, 0.0); }

MeanFunction MeanFunction::constant(std::size_t dim, double c) {
  const auto d = static_cast<Eigen::Index>(dim);
  return MeanFunction{
      [c](const Eigen::VectorXd&) { return c; },
      [d](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); },
      [d](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(d, d); },
  };
}

}  // namespace gpdphs::gp

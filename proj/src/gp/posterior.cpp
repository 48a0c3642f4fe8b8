// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/gp/posterior.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <utility>

#include <fmt/format.h>

#include "gpdphs/error.hpp"
#include "gpdphs/simd/kernels.hpp"

namespace gpdphs::gp {

namespace {

Eigen::VectorXd residuals(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                          const MeanFunction& m) {
  Eigen::VectorXd r(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    r(i) = y(i) - m.value(x.row(i).transpose());
  }
  return r;
}

void check_training(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                    const Hyperparams& h) {
  if (x.rows() < 1) {
    throw DimensionError("GP needs at least one training point");
  }
  if (x.rows() != y.size()) {
    throw DimensionError(fmt::format("{} training inputs but {} targets", x.rows(), y.size()));
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw InvariantError("GP training data contains non-finite values");
  }
  h.validate(static_cast<std::size_t>(x.cols()));
}

}  // namespace

Eigen::MatrixXd regularized_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const Hyperparams& h) {
  Eigen::MatrixXd k = kernel_matrix(inputs, inputs, h);
  k.diagonal().array() += h.sigma_n * h.sigma_n + kJitter;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError(fmt::format(
        "Cholesky of the {}x{} Gram matrix failed: training inputs are (near) duplicates. "
        "Remove duplicate rows or increase sigma_n (currently {}) to regularize.",
        k.rows(), k.cols(), h.sigma_n));
  }
  return llt.matrixL();
}

GpPosterior GpPosterior::fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, Hyperparams hyper,
                             MeanFunction prior_mean) {
  check_training(inputs, targets, hyper);
  GpPosterior p;
  p.chol_ = regularized_cholesky(inputs, hyper);
  const Eigen::VectorXd r = residuals(inputs, targets, prior_mean);
  const Eigen::VectorXd v = p.chol_.triangularView<Eigen::Lower>().solve(r);
  p.alpha_ = p.chol_.transpose().triangularView<Eigen::Upper>().solve(v);
  const Eigen::Index d = inputs.cols();
  p.inv_len2_.resize(d);
  p.scaled_inputs_.resize(inputs.rows(), d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double len = hyper.length(k);
    p.inv_len2_(k) = 1.0 / (len * len);
    p.scaled_inputs_.col(k) = inputs.col(k) / len;
  }
  p.inputs_ = std::move(inputs);
  p.targets_ = std::move(targets);
  p.hyper_ = std::move(hyper);
  p.mean_ = std::move(prior_mean);
  p.clamp_count_ = std::make_shared<std::atomic<std::size_t>>(0);
  return p;
}

Eigen::VectorXd GpPosterior::kernel_row(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != inputs_.cols()) {
    throw DimensionError(fmt::format("test input has size {}, GP expects {}", x.size(), inputs_.cols()));
  }
  const Eigen::Index d = inputs_.cols();
  Eigen::VectorXd xs(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    xs(k) = x(k) / hyper_.length(k);
  }
  Eigen::VectorXd out(inputs_.rows());
  simd::se_kernel_row(std::span<const double>(xs.data(), static_cast<std::size_t>(d)), scaled_inputs_.data(),
                      n_train(), n_train(), hyper_.sigma_f * hyper_.sigma_f,
                      std::span<double>(out.data(), n_train()));
  return out;
}

double GpPosterior::correction(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd k = kernel_row(x);
  return simd::dot(std::span<const double>(k.data(), n_train()), std::span<const double>(alpha_.data(), n_train()));
}

double GpPosterior::predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return mean_.value(x) + correction(x);
}

Prediction GpPosterior::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd k = kernel_row(x);
  Prediction out;
  out.mean = mean_.value(x) + k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  out.variance = hyper_.sigma_f * hyper_.sigma_f - v.squaredNorm();
  if (out.variance < 0.0) {
    clamp_count_->fetch_add(1);
    out.variance = 0.0;
  }
  return out;
}

Eigen::VectorXd GpPosterior::mean_gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd k = kernel_row(x);
  const Eigen::VectorXd w = alpha_.cwiseProduct(k);
  const double sw = w.sum();
  // sum_i w_i (x - x_i) = x * sum(w) - X^T w
  const Eigen::VectorXd s = x * sw - inputs_.transpose() * w;
  return mean_.gradient(x) - s.cwiseProduct(inv_len2_);
}

Eigen::MatrixXd GpPosterior::mean_hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd k = kernel_row(x);
  const Eigen::Index d = inputs_.cols();
  Eigen::MatrixXd hsum = Eigen::MatrixXd::Zero(d, d);
  double wsum = 0.0;
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    const double w = alpha_(i) * k(i);
    const Eigen::VectorXd r = (x - inputs_.row(i).transpose()).cwiseProduct(inv_len2_);
    hsum.noalias() += w * r * r.transpose();
    wsum += w;
  }
  hsum.diagonal() -= wsum * inv_len2_;
  return mean_.hessian(x) + hsum;
}

Eigen::MatrixXd GpPosterior::gradient_covariance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd k = kernel_row(x);
  const Eigen::Index d = inputs_.cols();
  const Eigen::Index n = inputs_.rows();
  Eigen::MatrixXd g(n, d);  // d k(x, x_i) / dx
  for (Eigen::Index i = 0; i < n; ++i) {
    g.row(i) = (-(k(i)) * (x - inputs_.row(i).transpose()).cwiseProduct(inv_len2_)).transpose();
  }
  const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(g);
  Eigen::MatrixXd cov = -(v.transpose() * v);
  cov.diagonal() += hyper_.sigma_f * hyper_.sigma_f * inv_len2_;
  return 0.5 * (cov + cov.transpose());
}

NlmlResult nlml_with_gradient(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                              const Eigen::Ref<const Eigen::VectorXd>& targets, const Hyperparams& h,
                              const MeanFunction& prior_mean) {
  check_training(inputs, targets, h);
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();
  const Eigen::MatrixXd kf = kernel_matrix(inputs, inputs, h);
  Eigen::MatrixXd k = kf;
  k.diagonal().array() += h.sigma_n * h.sigma_n + kJitter;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError(
        fmt::format("NLML: Cholesky failed; remove duplicate inputs or increase sigma_n (currently {})", h.sigma_n));
  }
  const Eigen::VectorXd r = residuals(inputs, targets, prior_mean);
  const Eigen::VectorXd alpha = llt.solve(r);
  const Eigen::MatrixXd l = llt.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();

  NlmlResult out;
  out.value = 0.5 * r.dot(alpha) + 0.5 * logdet + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // dNLML/dtheta = 1/2 tr((K^-1 - alpha alpha^T) dK/dtheta)
  const Eigen::MatrixXd a = llt.solve(Eigen::MatrixXd::Identity(n, n)) - alpha * alpha.transpose();
  const Eigen::Index n_len = h.length_scales.size();
  out.log_gradient.resize(n_len + 2);
  out.log_gradient(0) = (a.cwiseProduct(kf)).sum();  // dK/dlog sf = 2 Kf, times 1/2
  for (Eigen::Index m = 0; m < n_len; ++m) {
    Eigen::MatrixXd dk(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (Eigen::Index kk = 0; kk < d; ++kk) {
          if (n_len == 1 || kk == m) {
            const double diff = (inputs(i, kk) - inputs(j, kk)) / h.length(kk);
            s += diff * diff;
          }
        }
        dk(i, j) = kf(i, j) * s;
      }
    }
    out.log_gradient(1 + m) = 0.5 * (a.cwiseProduct(dk)).sum();
  }
  out.log_gradient(n_len + 1) = a.trace() * h.sigma_n * h.sigma_n;  // dK/dlog sn = 2 sn^2 I
  return out;
}

double nlml(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const Eigen::Ref<const Eigen::VectorXd>& targets,
            const Hyperparams& h, const MeanFunction& prior_mean) {
  check_training(inputs, targets, h);
  const Eigen::MatrixXd l = regularized_cholesky(inputs, h);
  const Eigen::VectorXd r = residuals(inputs, targets, prior_mean);
  const Eigen::VectorXd v = l.triangularView<Eigen::Lower>().solve(r);
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  return 0.5 * v.squaredNorm() + 0.5 * logdet +
         0.5 * static_cast<double>(inputs.rows()) * std::log(2.0 * std::numbers::pi);
}

}  // namespace gpdphs::gp

// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/learn/dphs_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "gpdphs/error.hpp"
#include "gpdphs/gp/optimize.hpp"

namespace gpdphs::learn {

Eigen::MatrixXd se_gradient_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& x2, const gp::Hyperparams& h) {
  const Eigen::Index d = x.size();
  h.validate(static_cast<std::size_t>(d));
  Eigen::VectorXd inv_l2(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    inv_l2(k) = 1.0 / (h.length(k) * h.length(k));
  }
  const double k = gp::se_kernel(x, x2, h);
  const Eigen::VectorXd r = (x - x2).cwiseProduct(inv_l2);
  Eigen::MatrixXd out = -(r * r.transpose());
  out.diagonal() += inv_l2;
  return k * out;
}

Eigen::MatrixXd dphs_kernel(const Eigen::Ref<const Eigen::VectorXd>& x_stacked,
                            const Eigen::Ref<const Eigen::VectorXd>& x2_stacked, const Eigen::MatrixXd& op,
                            const gp::Hyperparams& h) {
  if (x_stacked.size() != x2_stacked.size() || op.cols() != x_stacked.size()) {
    throw DimensionError(fmt::format("dphs_kernel: stacked sizes {} and {} do not match the {}x{} operator",
                                     x_stacked.size(), x2_stacked.size(), op.rows(), op.cols()));
  }
  return op * se_gradient_kernel(x_stacked, x2_stacked, h) * op.transpose();
}

Eigen::MatrixXd dphs_kernel(const Eigen::Ref<const Eigen::VectorXd>& x_stacked,
                            const Eigen::Ref<const Eigen::VectorXd>& x2_stacked, const core::StructureMatrices& s,
                            const core::SpatialGrid& grid, const gp::Hyperparams& h) {
  return dphs_kernel(x_stacked, x2_stacked, core::structure_operator_matrix(s, grid), h);
}

namespace {

Eigen::MatrixXd dphs_gram(const Eigen::Ref<const Eigen::MatrixXd>& states, const Eigen::MatrixXd& op,
                          const gp::Hyperparams& h) {
  const Eigen::Index nt = states.rows();
  const Eigen::Index m = op.rows();
  Eigen::MatrixXd k(nt * m, nt * m);
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = i; j < nt; ++j) {
      const Eigen::MatrixXd blk = dphs_kernel(states.row(i).transpose(), states.row(j).transpose(), op, h);
      k.block(i * m, j * m, m, m) = blk;
      k.block(j * m, i * m, m, m) = blk.transpose();
    }
  }
  k.diagonal().array() += h.sigma_n * h.sigma_n + gp::kJitter;
  return k;
}

Eigen::VectorXd flatten_rows(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const Eigen::MatrixXd t = m.transpose();
  return Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
}

}  // namespace

double dphs_nlml(const Eigen::Ref<const Eigen::MatrixXd>& states, const Eigen::Ref<const Eigen::MatrixXd>& derivs,
                 const Eigen::MatrixXd& op, const gp::Hyperparams& h) {
  const Eigen::MatrixXd k = dphs_gram(states, op, h);
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("dphs Gram matrix is not positive definite; increase sigma_n");
  }
  const Eigen::VectorXd y = flatten_rows(derivs);
  const Eigen::VectorXd v = llt.matrixL().solve(y);
  const Eigen::MatrixXd l = llt.matrixL();
  return 0.5 * v.squaredNorm() + l.diagonal().array().log().sum() +
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

DphsDynamicsGp DphsDynamicsGp::fit(Eigen::MatrixXd states, Eigen::MatrixXd derivs, const core::StructureMatrices& s,
                                   const core::SpatialGrid& grid, gp::Hyperparams h, const DphsFitOptions& opts) {
  if (states.rows() != derivs.rows() || states.cols() != derivs.cols() || states.rows() < 1) {
    throw DimensionError("dphs GP: states and derivatives must have equal, non-empty shapes");
  }
  DphsDynamicsGp g;
  g.op_ = core::structure_operator_matrix(s, grid);
  if (g.op_.cols() != states.cols()) {
    throw DimensionError(fmt::format("stacked state width {} does not match the grid operator ({})", states.cols(),
                                     g.op_.cols()));
  }
  if (opts.optimize) {
    const Eigen::Index nl = h.length_scales.size();
    Eigen::VectorXd t0(nl + 2);
    t0(0) = std::log(h.sigma_f);
    t0.segment(1, nl) = h.length_scales.array().log();
    t0(nl + 1) = std::log(std::max(h.sigma_n, 1e-6));
    gp::LogSpaceProblem problem;
    problem.gradient = false;
    problem.lower = Eigen::VectorXd::Constant(nl + 2, std::log(1e-4));
    problem.upper = Eigen::VectorXd::Constant(nl + 2, std::log(1e4));
    problem.objective = [&](const Eigen::VectorXd& t, Eigen::VectorXd*) {
      gp::Hyperparams trial = h;
      trial.sigma_f = std::exp(t(0));
      trial.length_scales = t.segment(1, nl).array().exp();
      trial.sigma_n = std::exp(t(nl + 1));
      return dphs_nlml(states, derivs, g.op_, trial);
    };
    gp::MinimizeOptions mo;
    mo.n_starts = opts.n_starts;
    mo.seed = opts.seed;
    mo.max_iterations = 50;
    const double before = dphs_nlml(states, derivs, g.op_, h);
    const auto res = gp::minimize_log_space(problem, t0, mo);
    if (res.value < before) {
      h.sigma_f = std::exp(res.theta(0));
      h.length_scales = res.theta.segment(1, nl).array().exp();
      h.sigma_n = std::exp(res.theta(nl + 1));
    }
  }
  const Eigen::MatrixXd k = dphs_gram(states, g.op_, h);
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("dphs Gram matrix is not positive definite; increase sigma_n");
  }
  g.alpha_ = llt.solve(flatten_rows(derivs));
  g.nlml_ = dphs_nlml(states, derivs, g.op_, h);
  g.states_ = std::move(states);
  g.hyper_ = std::move(h);
  return g;
}

Eigen::VectorXd DphsDynamicsGp::predict_derivative(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return op_ * predict_co_energy(x);
}

Eigen::VectorXd DphsDynamicsGp::predict_co_energy(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::Index m = op_.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(op_.cols());
  for (Eigen::Index i = 0; i < states_.rows(); ++i) {
    out += se_gradient_kernel(x, states_.row(i).transpose(), hyper_) * (op_.transpose() * alpha_.segment(i * m, m));
  }
  return out;
}

}  // namespace gpdphs::learn

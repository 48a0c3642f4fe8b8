// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/gp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "gpdphs/error.hpp"
#include "gpdphs/gp/posterior.hpp"

namespace gpdphs::gp {

namespace {

constexpr double kHuge = 1e100;
constexpr double kPenalty = 1e3;

struct Search {
  const LogSpaceProblem* problem;
  Eigen::VectorXd best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  int evaluations = 0;

  Eigen::VectorXd clamp(const Eigen::VectorXd& t) const {
    return t.cwiseMax(problem->lower).cwiseMin(problem->upper);
  }

  // Objective on the clamped point plus a quadratic wall outside the box.
  double raw(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    const Eigen::VectorXd c = clamp(theta);
    double f = 0.0;
    try {
      f = problem->objective(c, grad);
    } catch (const Error&) {
      f = std::numeric_limits<double>::quiet_NaN();
    }
    ++evaluations;
    if (!std::isfinite(f) || (grad != nullptr && !grad->allFinite())) {
      if (grad != nullptr) {
        grad->setZero(theta.size());
      }
      return kHuge;
    }
    if (f < best_value) {
      best_value = f;
      best_theta = c;
    }
    const Eigen::VectorXd out = theta - c;
    if (grad != nullptr) {
      *grad += 2.0 * kPenalty * out;
    }
    return f + kPenalty * out.squaredNorm();
  }

  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    if (problem->gradient || grad == nullptr) {
      return raw(theta, grad);
    }
    const double f = raw(theta, nullptr);
    grad->resize(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double step = 1e-5 * std::max(1.0, std::abs(theta(k)));
      Eigen::VectorXd tp = theta;
      Eigen::VectorXd tm = theta;
      tp(k) += step;
      tm(k) -= step;
      (*grad)(k) = (raw(tp, nullptr) - raw(tm, nullptr)) / (2.0 * step);
    }
    return f;
  }
};

Eigen::VectorXd to_eigen(const gsl_vector* v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) {
    out(static_cast<Eigen::Index>(i)) = gsl_vector_get(v, i);
  }
  return out;
}

double gsl_f(const gsl_vector* v, void* params) {
  return static_cast<Search*>(params)->eval(to_eigen(v), nullptr);
}

void gsl_df(const gsl_vector* v, void* params, gsl_vector* df) {
  Eigen::VectorXd g;
  static_cast<Search*>(params)->eval(to_eigen(v), &g);
  for (std::size_t i = 0; i < df->size; ++i) {
    gsl_vector_set(df, i, g(static_cast<Eigen::Index>(i)));
  }
}

void gsl_fdf(const gsl_vector* v, void* params, double* f, gsl_vector* df) {
  Eigen::VectorXd g;
  *f = static_cast<Search*>(params)->eval(to_eigen(v), &g);
  for (std::size_t i = 0; i < df->size; ++i) {
    gsl_vector_set(df, i, g(static_cast<Eigen::Index>(i)));
  }
}

void run_bfgs(Search& search, const Eigen::VectorXd& start, const MinimizeOptions& opts) {
  const auto dim = static_cast<std::size_t>(start.size());
  gsl_multimin_function_fdf fn;
  fn.n = dim;
  fn.f = &gsl_f;
  fn.df = &gsl_df;
  fn.fdf = &gsl_fdf;
  fn.params = &search;

  gsl_vector* x = gsl_vector_alloc(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x, i, start(static_cast<Eigen::Index>(i)));
  }
  gsl_multimin_fdfminimizer* m = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim);
  if (gsl_multimin_fdfminimizer_set(m, &fn, x, 0.1, 0.1) == GSL_SUCCESS) {
    for (int it = 0; it < opts.max_iterations; ++it) {
      if (gsl_multimin_fdfminimizer_iterate(m) != GSL_SUCCESS) {
        break;
      }
      if (gsl_multimin_test_gradient(m->gradient, opts.gradient_tolerance) == GSL_SUCCESS) {
        break;
      }
    }
  }
  gsl_multimin_fdfminimizer_free(m);
  gsl_vector_free(x);
}

}  // namespace

MinimizeResult minimize_log_space(const LogSpaceProblem& problem, const Eigen::VectorXd& theta0,
                                  const MinimizeOptions& opts) {
  if (problem.lower.size() != theta0.size() || problem.upper.size() != theta0.size()) {
    throw DimensionError("minimize_log_space: bounds do not match the parameter vector");
  }
  gsl_set_error_handler_off();
  Search search{&problem, theta0, std::numeric_limits<double>::infinity(), 0};
  const Eigen::VectorXd t0 = search.clamp(theta0);
  search.raw(t0, nullptr);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-opts.start_spread, opts.start_spread);
  for (int s = 0; s < std::max(1, opts.n_starts); ++s) {
    Eigen::VectorXd start = t0;
    if (s > 0) {
      for (Eigen::Index k = 0; k < start.size(); ++k) {
        start(k) += unif(rng);
      }
      start = search.clamp(start);
    }
    run_bfgs(search, start, opts);
  }
  if (!std::isfinite(search.best_value)) {
    throw ConvergenceError("objective was non-finite at every evaluated point");
  }
  return MinimizeResult{search.best_theta, search.best_value, search.evaluations};
}

OptimizeResult optimize_hyperparams(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                    const Eigen::Ref<const Eigen::VectorXd>& targets, const Hyperparams& init,
                                    const MeanFunction& prior_mean, const OptimizeOptions& opts) {
  if (inputs.rows() < 2) {
    throw DimensionError("hyperparameter optimization needs at least two training points");
  }
  init.validate(static_cast<std::size_t>(inputs.cols()));
  const Eigen::Index n_len = init.length_scales.size();
  const Eigen::Index dim = n_len + (opts.optimize_noise ? 2 : 1);
  const auto& b = opts.bounds;

  auto unpack = [&](const Eigen::VectorXd& t) {
    Hyperparams h = init;
    h.sigma_f = std::exp(t(0));
    h.length_scales = t.segment(1, n_len).array().exp();
    if (opts.optimize_noise) {
      h.sigma_n = std::exp(t(n_len + 1));
    }
    return h;
  };

  Eigen::VectorXd theta0(dim);
  Eigen::VectorXd lo(dim);
  Eigen::VectorXd hi(dim);
  theta0(0) = std::log(init.sigma_f);
  lo(0) = std::log(b.sigma_f_min);
  hi(0) = std::log(b.sigma_f_max);
  for (Eigen::Index k = 0; k < n_len; ++k) {
    theta0(1 + k) = std::log(init.length_scales(k));
    lo(1 + k) = std::log(b.length_min);
    hi(1 + k) = std::log(b.length_max);
  }
  if (opts.optimize_noise) {
    theta0(n_len + 1) = std::log(std::max(init.sigma_n, b.sigma_n_min));
    lo(n_len + 1) = std::log(b.sigma_n_min);
    hi(n_len + 1) = std::log(b.sigma_n_max);
  }

  LogSpaceProblem problem;
  problem.lower = lo;
  problem.upper = hi;
  problem.objective = [&](const Eigen::VectorXd& t, Eigen::VectorXd* grad) {
    const Hyperparams h = unpack(t);
    if (grad == nullptr) {
      return nlml(inputs, targets, h, prior_mean);
    }
    const NlmlResult r = nlml_with_gradient(inputs, targets, h, prior_mean);
    *grad = r.log_gradient.head(dim);
    return r.value;
  };

  OptimizeResult out;
  out.nlml_init = nlml(inputs, targets, init, prior_mean);
  const MinimizeResult m = minimize_log_space(problem, theta0, opts.search);
  if (m.value < out.nlml_init) {
    out.hyper = unpack(m.theta);
    out.nlml_final = nlml(inputs, targets, out.hyper, prior_mean);
    if (out.nlml_final <= out.nlml_init) {
      return out;
    }
  }
  out.hyper = init;
  out.nlml_final = out.nlml_init;
  return out;
}

}  // namespace gpdphs::gp

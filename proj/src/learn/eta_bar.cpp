// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/learn/eta_bar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "gpdphs/core/operator.hpp"
#include "gpdphs/error.hpp"

namespace gpdphs::learn {

void DomainBox::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw DimensionError("domain box is empty or has mismatched bounds");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!(upper(k) > lower(k))) {
      throw InvariantError(fmt::format("domain box component {} is empty: [{}, {}]", k, lower(k), upper(k)));
    }
  }
}

double confidence_quantile(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError(fmt::format("confidence must lie in (0, 1), got {}", confidence));
  }
  const boost::math::normal_distribution<double> normal;
  return boost::math::quantile(normal, 1.0 - 0.5 * (1.0 - confidence));
}

namespace {

double l2_norm(const core::SpatialGrid& grid, const Eigen::MatrixXd& f) {
  return std::sqrt(core::integrate(grid, f.rowwise().squaredNorm()));
}

}  // namespace

UncertaintyBound estimate_eta_bar_oracle(const core::DensityModel& model, const core::DensityModel& truth,
                                         const core::StructureMatrices& s, const core::SpatialGrid& grid,
                                         const DomainBox& box, double confidence, const OracleSweepOptions& opts) {
  box.validate();
  confidence_quantile(confidence);
  const auto n = static_cast<Eigen::Index>(s.n());
  if (box.lower.size() != n || opts.levels < 2) {
    throw DimensionError("oracle sweep: box dimension or level count invalid");
  }
  const auto levels = static_cast<Eigen::Index>(opts.levels);
  const Eigen::Index pairs = levels * levels;
  Eigen::Index total = 1;
  for (Eigen::Index k = 0; k < n; ++k) {
    total *= pairs;
  }
  const Eigen::VectorXd z = grid.nodes();
  const double len = grid.length();

  UncertaintyBound out;
  out.confidence = confidence;
  out.domain_box = box;
  out.mode = "oracle";
  Eigen::MatrixXd x(z.size(), n);
  Eigen::MatrixXd gap(z.size(), n);
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index rem = idx;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index pair = rem % pairs;
      rem /= pairs;
      const double step = (box.upper(k) - box.lower(k)) / static_cast<double>(levels - 1);
      const double left = box.lower(k) + step * static_cast<double>(pair % levels);
      const double right = box.lower(k) + step * static_cast<double>(pair / levels);
      x.col(k) = left + (right - left) * (z.array() - grid.a()) / len;
    }
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      gap.row(j) = (truth.gradient(x.row(j).transpose()) - model.gradient(x.row(j).transpose())).transpose();
    }
    const Eigen::MatrixXd eta = core::apply_structure_operator(gap, s, grid);
    out.raw_max = std::max(out.raw_max, l2_norm(grid, eta));
    ++out.fields_evaluated;
  }
  out.eta_bar = opts.margin * out.raw_max;
  return out;
}

UncertaintyBound estimate_eta_bar_deployment(const LearnedHamiltonian& lh, const core::StructureMatrices& s,
                                             const core::SpatialGrid& grid, const DomainBox& box,
                                             double confidence, const DeploymentOptions& opts) {
  box.validate();
  const double beta = confidence_quantile(confidence);
  const auto n = static_cast<Eigen::Index>(s.n());
  if (box.lower.size() != n || opts.n_samples == 0) {
    throw DimensionError("deployment sweep: box dimension or sample count invalid");
  }

  // Operator norm in the weighted inner product: || W^1/2 B W^-1/2 ||_2.
  const Eigen::MatrixXd op = core::structure_operator_matrix(s, grid);
  Eigen::VectorXd sw(op.rows());
  for (std::size_t j = 0; j < grid.n_points(); ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      sw(static_cast<Eigen::Index>(j) * n + k) = std::sqrt(grid.weights()[j]);
    }
  }
  const Eigen::MatrixXd scaled = sw.asDiagonal() * op * sw.cwiseInverse().asDiagonal();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  const double op_norm = svd.singularValues()(0);

  // Latin hypercube: one stratum per sample and component, strata shuffled per component.
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(opts.n_samples);
  Eigen::MatrixXd pts(m, n);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < n; ++k) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(perm[i - 1], perm[pick(rng)]);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const double u = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + unif(rng)) / static_cast<double>(m);
      pts(i, k) = box.lower(k) + u * (box.upper(k) - box.lower(k));
    }
  }

  double max_std = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::MatrixXd cov = lh.gradient_covariance(pts.row(i).transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    max_std = std::max(max_std, std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff())));
  }

  UncertaintyBound out;
  out.confidence = confidence;
  out.domain_box = box;
  out.mode = "deployment";
  out.raw_max = max_std;
  out.fields_evaluated = opts.n_samples;
  out.eta_bar = beta * op_norm * max_std * std::sqrt(grid.length());
  return out;
}

}  // namespace gpdphs::learn

// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/swe/swe.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::swe {

void SweParams::validate() const {
  if (!(length_l > 0.0)) {
    throw ConfigError(fmt::format("channel length must be positive, got {}", length_l));
  }
  if (!(d >= 0.0)) {
    throw ConfigError(fmt::format("friction D must be non-negative, got {}", d));
  }
  if (!(g > 0.0)) {
    throw ConfigError(fmt::format("g must be positive, got {}", g));
  }
  if (!(xi1 >= 0.0) || !(xi2 >= 0.0)) {
    throw ConfigError("controller gains must be non-negative");
  }
}

double true_density(double q, double p, const SweParams& params) {
  const double s = p - params.delta_center;
  return 0.5 * (q * p * p + std::exp(-s * s) + params.g * q * q);
}

std::pair<double, double> true_co_energy(double q, double p, const SweParams& params) {
  const double s = p - params.delta_center;
  return {0.5 * p * p + params.g * q, q * p - s * std::exp(-s * s)};
}

SweDensity::SweDensity(SweParams params, bool include_delta) : params_(params), include_delta_(include_delta) {}

double SweDensity::density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double q = x(0);
  const double p = x(1);
  if (include_delta_) {
    return true_density(q, p, params_);
  }
  return 0.5 * (q * p * p + params_.g * q * q);
}

Eigen::VectorXd SweDensity::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double q = x(0);
  const double p = x(1);
  Eigen::VectorXd e(2);
  if (include_delta_) {
    const auto [pp, qq] = true_co_energy(q, p, params_);
    e << pp, qq;
  } else {
    e << 0.5 * p * p + params_.g * q, q * p;
  }
  return e;
}

Eigen::MatrixXd SweDensity::hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double q = x(0);
  const double p = x(1);
  double hpp = q;
  if (include_delta_) {
    const double s = p - params_.delta_center;
    hpp += (2.0 * s * s - 1.0) * std::exp(-s * s);
  }
  Eigen::MatrixXd h(2, 2);
  h << params_.g, p, p, hpp;
  return h;
}

gp::MeanFunction prior_mean(double g) {
  return gp::MeanFunction{
      [g](const Eigen::VectorXd& x) { return 0.5 * (x(0) * x(1) * x(1) + g * x(0) * x(0)); },
      [g](const Eigen::VectorXd& x) {
        Eigen::VectorXd e(2);
        e << 0.5 * x(1) * x(1) + g * x(0), x(0) * x(1);
        return e;
      },
      [g](const Eigen::VectorXd& x) {
        Eigen::MatrixXd h(2, 2);
        h << g, x(1), x(1), x(0);
        return h;
      },
  };
}

learn::PriorDescriptor prior_descriptor(double g) { return learn::PriorDescriptor{"swe_quadratic", {g}}; }

gp::MeanFunction mean_from_descriptor(const learn::PriorDescriptor& d, std::size_t dim) {
  if (d.kind == "zero") {
    return gp::MeanFunction::zero(dim);
  }
  if (d.kind == "swe_quadratic") {
    if (d.params.size() != 1 || dim != 2) {
      throw ConfigError("swe_quadratic prior needs dimension 2 and one parameter (g)");
    }
    return prior_mean(d.params[0]);
  }
  throw ConfigError(fmt::format("unknown prior mean kind '{}'", d.kind));
}

core::StructureMatrices structure(const SweParams& params) {
  params.validate();
  Eigen::MatrixXd p1(2, 2);
  p1 << 0.0, -1.0, -1.0, 0.0;
  Eigen::MatrixXd g0 = Eigen::MatrixXd::Zero(2, 2);
  g0(1, 1) = params.d;
  return core::StructureMatrices(p1, Eigen::MatrixXd::Zero(2, 2), g0);
}

core::SpatialGrid grid(const SweParams& params, std::size_t n_points) {
  return core::SpatialGrid(0.0, params.length_l, n_points);
}

std::vector<core::TraceSelector> control_inputs() {
  return {{core::BoundaryEnd::kA, 1}, {core::BoundaryEnd::kB, 0}};
}

std::vector<core::TraceSelector> closed_gate_inputs() {
  return {{core::BoundaryEnd::kA, 1}, {core::BoundaryEnd::kB, 1}};
}

core::BoundaryIoMatrices explicit_io_matrices() {
  const double c = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd w(2, 4);
  Eigen::MatrixXd wt(2, 4);
  w << 1, 0, 0, 1, 0, -1, 1, 0;
  wt << 0, 1, 1, 0, 1, 0, 0, -1;
  return core::BoundaryIoMatrices{c * w, c * wt};
}

Eigen::MatrixXd equilibrium_co_energy(const SweParams& params, const core::SpatialGrid& grid) {
  params.validate();
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(grid.n_points()), 2);
  for (Eigen::Index j = 0; j < targets.rows(); ++j) {
    targets(j, 0) = params.q_bar * params.d * (params.length_l - grid.z(static_cast<std::size_t>(j))) + params.p_bar;
    targets(j, 1) = params.q_bar;
  }
  return targets;
}

EquilibriumProfile equilibrium_profile(const SweParams& params, const core::SpatialGrid& grid,
                                       const core::DensityModel& density) {
  const Eigen::MatrixXd targets = equilibrium_co_energy(params, grid);
  const Eigen::Index n_pts = targets.rows();
  Eigen::MatrixXd x(n_pts, 2);
  Eigen::VectorXd guess(2);
  guess << params.p_bar / params.g, params.p_bar != 0.0 ? params.q_bar * params.g / params.p_bar : 0.0;
  if (!(guess(0) > 0.0)) {
    guess(0) = 1.0;
  }
  core::CoEnergyInversionOptions opts;
  opts.positive_component = 0;
  for (Eigen::Index j = 0; j < n_pts; ++j) {
    const double z = grid.z(static_cast<std::size_t>(j));
    try {
      x.row(j) = core::invert_co_energy(density, targets.row(j).transpose(), guess, opts).transpose();
    } catch (const ConvergenceError& err) {
      if (j == 0) {
        throw ConvergenceError(fmt::format("equilibrium at z = {:.6g}: {}", z, err.what()));
      }
      try {
        x.row(j) = core::invert_co_energy(density, targets.row(j).transpose(), x.row(j - 1).transpose(), opts)
                       .transpose();
      } catch (const ConvergenceError&) {
        throw ConvergenceError(fmt::format("equilibrium at z = {:.6g} (grid point {}): {}", z, j, err.what()));
      }
    }
  }
  Eigen::VectorXd u(2);
  u << targets(0, 1), targets(n_pts - 1, 0);
  return EquilibriumProfile{targets, core::StateField(grid, x), u};
}

EquilibriumProfile equilibrium_profile(const SweParams& params, const core::SpatialGrid& grid) {
  return equilibrium_profile(params, grid, SweDensity(params));
}

control::CasimirSpec casimirs(const SweParams& params, const core::SpatialGrid& grid) {
  const Eigen::Index n_pts = static_cast<Eigen::Index>(grid.n_points());
  Eigen::MatrixXd psi1(n_pts, 2);
  Eigen::MatrixXd psi2(n_pts, 2);
  for (Eigen::Index j = 0; j < n_pts; ++j) {
    psi1(j, 0) = params.d * (params.length_l - grid.z(static_cast<std::size_t>(j)));
    psi1(j, 1) = 1.0;
    psi2(j, 0) = 1.0;
    psi2(j, 1) = 0.0;
  }
  return control::CasimirSpec(-Eigen::MatrixXd::Identity(2, 2), {psi1, psi2}, grid);
}

Eigen::VectorXd passive_output_closed_form(const Eigen::Ref<const Eigen::VectorXd>& y,
                                           const Eigen::Ref<const Eigen::VectorXd>& u,
                                           const Eigen::Ref<const Eigen::MatrixXd>& e_field, const SweParams& params,
                                           const core::SpatialGrid& grid) {
  Eigen::VectorXd ybar = y;
  ybar(0) += -2.0 * params.d * core::integrate(grid, e_field.col(1)) + params.d * params.length_l * u(0);
  return ybar;
}

core::StateField uniform_state(const core::SpatialGrid& grid, double q0, double p0) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(grid.n_points()), 2);
  x.col(0).setConstant(q0);
  x.col(1).setConstant(p0);
  return core::StateField(grid, x);
}

Eigen::MatrixXd density_samples(const SweParams& params, std::size_t m, const Eigen::Vector2d& lower,
                                const Eigen::Vector2d& upper, std::uint64_t seed, bool include_delta) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uq(lower(0), upper(0));
  std::uniform_real_distribution<double> up(lower(1), upper(1));
  const SweDensity truth(params, include_delta);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double q = uq(rng);
    const double p = up(rng);
    out(i, 0) = q;
    out(i, 1) = p;
    out(i, 2) = truth.density(Eigen::Vector2d(q, p));
  }
  return out;
}

double density_rms_error(const core::DensityModel& model, const core::DensityModel& truth,
                         const Eigen::Vector2d& lower, const Eigen::Vector2d& upper, std::size_t n) {
  double acc = 0.0;
  const Eigen::VectorXd qs = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), lower(0), upper(0));
  const Eigen::VectorXd ps = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), lower(1), upper(1));
  for (Eigen::Index i = 0; i < qs.size(); ++i) {
    for (Eigen::Index j = 0; j < ps.size(); ++j) {
      const Eigen::Vector2d x(qs(i), ps(j));
      const double d = model.density(x) - truth.density(x);
      acc += d * d;
    }
  }
  return std::sqrt(acc / static_cast<double>(n * n));
}

}  // namespace gpdphs::swe

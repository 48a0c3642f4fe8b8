// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/core/density.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::core {

double hamiltonian(const DensityModel& model, const StateField& state) {
  const auto& v = state.values();
  Eigen::VectorXd h(v.rows());
  for (Eigen::Index j = 0; j < v.rows(); ++j) {
    h(j) = model.density(v.row(j).transpose());
  }
  return integrate(state.grid(), h);
}

Eigen::MatrixXd co_energy_field(const DensityModel& model, const StateField& state) {
  if (state.n() != model.dim()) {
    throw DimensionError(fmt::format("state has {} components, density expects {}", state.n(), model.dim()));
  }
  const auto& v = state.values();
  Eigen::MatrixXd e(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < v.rows(); ++j) {
    e.row(j) = model.gradient(v.row(j).transpose()).transpose();
  }
  return e;
}

Eigen::VectorXd invert_co_energy(const DensityModel& model, const Eigen::Ref<const Eigen::VectorXd>& target,
                                 const Eigen::Ref<const Eigen::VectorXd>& x0,
                                 const CoEnergyInversionOptions& opts) {
  if (target.size() != static_cast<Eigen::Index>(model.dim()) || x0.size() != target.size()) {
    throw DimensionError("co-energy inversion: size mismatch");
  }
  Eigen::VectorXd x = x0;
  if (opts.positive_component && x(static_cast<Eigen::Index>(*opts.positive_component)) <= opts.floor) {
    x(static_cast<Eigen::Index>(*opts.positive_component)) = 10.0 * opts.floor + 1e-3;
  }
  const double scale = 1.0 + target.norm();
  Eigen::VectorXd r = model.gradient(x) - target;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double rn = r.norm();
    if (rn <= opts.tolerance * scale) {
      return x;
    }
    const Eigen::VectorXd step = model.hessian(x).fullPivLu().solve(r);
    if (!step.allFinite()) {
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      Eigen::VectorXd trial = x - alpha * step;
      if (opts.positive_component &&
          trial(static_cast<Eigen::Index>(*opts.positive_component)) <= opts.floor) {
        continue;
      }
      const Eigen::VectorXd rt = model.gradient(trial) - target;
      if (rt.allFinite() && rt.norm() < rn) {
        x = trial;
        r = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      break;
    }
  }
  if (r.norm() <= opts.tolerance * scale) {
    return x;
  }
  throw ConvergenceError(fmt::format("co-energy inversion did not converge (residual {:.3e})", r.norm()));
}

}  // namespace gpdphs::core

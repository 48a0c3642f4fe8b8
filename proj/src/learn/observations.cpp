// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/learn/observations.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "gpdphs/error.hpp"
#include "gpdphs/gp/posterior.hpp"

namespace gpdphs::learn {

void ObservationSet::validate(double a, double b) const {
  if (times.size() == 0 || points.size() == 0) {
    throw DimensionError("observation set is empty");
  }
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (!(times(i) > times(i - 1))) {
      throw InvariantError("observation times must be strictly increasing");
    }
  }
  for (Eigen::Index j = 0; j < points.size(); ++j) {
    if (points(j) < a - 1e-12 || points(j) > b + 1e-12) {
      throw InvariantError(fmt::format("observation point {} lies outside [{}, {}]", points(j), a, b));
    }
  }
  if (states.size() != n_t() || inputs.rows() != times.size()) {
    throw DimensionError("observation arrays disagree on N_t");
  }
  for (const auto& s : states) {
    if (static_cast<std::size_t>(s.rows()) != n_z() || s.cols() != states.front().cols()) {
      throw DimensionError("observation state blocks must all be N_z x n");
    }
  }
}

ObservationSet collect_observations(const sim::Plant& plant, const core::StateField& initial,
                                    const sim::InputSignal& excitation, const sim::SimConfig& cfg,
                                    const Eigen::Ref<const Eigen::VectorXd>& sample_times,
                                    const Eigen::Ref<const Eigen::VectorXd>& sample_points,
                                    const SamplingOptions& opts) {
  sim::SimConfig run = cfg;
  run.log_every = 1;
  if (sample_times.size() > 0) {
    run.horizon = std::max(run.dt, sample_times.maxCoeff());
  }
  const auto traj = sim::simulate_open_loop(plant, initial, excitation, run);
  const auto& grid = plant.grid;

  ObservationSet obs;
  obs.times = sample_times;
  obs.points = sample_points;
  const Eigen::Index n = static_cast<Eigen::Index>(plant.structure.n());
  obs.inputs.resize(sample_times.size(), n);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (Eigen::Index i = 0; i < sample_times.size(); ++i) {
    const double k = std::round(sample_times(i) / run.dt);
    if (k < 0.0) {
      throw ConfigError(fmt::format("sample time {} is negative", sample_times(i)));
    }
    obs.times(i) = k * run.dt;
    const auto step = static_cast<std::size_t>(k);
    if (step >= traj.states.size()) {
      throw ConfigError(fmt::format("sample time {} lies beyond the simulated horizon", sample_times(i)));
    }
    const Eigen::MatrixXd& x = traj.states[step];
    Eigen::MatrixXd block(sample_points.size(), n);
    for (Eigen::Index j = 0; j < sample_points.size(); ++j) {
      const double pos = (sample_points(j) - grid.a()) / grid.spacing();
      auto lo = static_cast<Eigen::Index>(std::floor(pos));
      lo = std::clamp<Eigen::Index>(lo, 0, x.rows() - 2);
      const double w = pos - static_cast<double>(lo);
      if (std::abs(w) < 1e-12) {
        block.row(j) = x.row(lo);
      } else if (std::abs(w - 1.0) < 1e-12) {
        block.row(j) = x.row(lo + 1);
      } else {
        block.row(j) = (1.0 - w) * x.row(lo) + w * x.row(lo + 1);
      }
    }
    if (opts.noise_std > 0.0) {
      for (Eigen::Index j = 0; j < block.rows(); ++j) {
        for (Eigen::Index c = 0; c < n; ++c) {
          block(j, c) += opts.noise_std * noise(rng);
        }
      }
    }
    obs.states.push_back(std::move(block));
    obs.inputs.row(i) = traj.u[step].transpose();
  }
  obs.validate(grid.a(), grid.b());
  return obs;
}

AugmentedDataset upsample_and_differentiate(const ObservationSet& obs, std::size_t n_e, const gp::Hyperparams& h,
                                            const Eigen::VectorXd* upsample_points) {
  if (obs.n_t() < 3) {
    throw DimensionError("upsampling needs at least three time samples");
  }
  if (n_e < obs.n_z()) {
    throw DimensionError(fmt::format("N_e = {} must be at least N_z = {}", n_e, obs.n_z()));
  }
  const auto ne = static_cast<Eigen::Index>(n_e);
  Eigen::VectorXd zs;
  if (upsample_points != nullptr) {
    if (upsample_points->size() != ne) {
      throw DimensionError("upsample point count must equal N_e");
    }
    zs = *upsample_points;
  } else {
    zs = Eigen::VectorXd::LinSpaced(ne, obs.points.minCoeff(), obs.points.maxCoeff());
  }
  const Eigen::Index nt = obs.times.size();
  const Eigen::Index nz = obs.points.size();
  const auto n = static_cast<Eigen::Index>(obs.n());

  Eigen::MatrixXd inputs(nt * nz, 2);
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = 0; j < nz; ++j) {
      inputs(i * nz + j, 0) = obs.times(i);
      inputs(i * nz + j, 1) = obs.points(j);
    }
  }

  AugmentedDataset out;
  out.n_e = n_e;
  out.points = zs;
  out.stacked_states.resize(nt, ne * n);
  out.stacked_derivs.resize(nt, ne * n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::VectorXd y(nt * nz);
    for (Eigen::Index i = 0; i < nt; ++i) {
      y.segment(i * nz, nz) = obs.states[static_cast<std::size_t>(i)].col(c);
    }
    const auto post = gp::GpPosterior::fit(inputs, y, h, gp::MeanFunction::constant(2, y.mean()));
    Eigen::VectorXd tz(2);
    for (Eigen::Index i = 0; i < nt; ++i) {
      for (Eigen::Index j = 0; j < ne; ++j) {
        tz << obs.times(i), zs(j);
        out.stacked_states(i, j * n + c) = post.predict_mean(tz);
        out.stacked_derivs(i, j * n + c) = post.mean_gradient(tz)(0);
      }
    }
  }
  return out;
}

}  // namespace gpdphs::learn

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpdphs/core/density.hpp"
#include "gpdphs/gp/optimize.hpp"
#include "gpdphs/gp/posterior.hpp"

namespace gpdphs::learn {

/// Names a prior mean so that a trained model can be serialized and rebuilt.
struct PriorDescriptor {
  std::string kind = "zero";
  std::vector<double> params;
};

/// GP surrogate mu(H) of the Hamiltonian density, prior mean included.
class LearnedHamiltonian final : public core::DensityModel {
 public:
  LearnedHamiltonian(gp::GpPosterior gp, PriorDescriptor prior);

  std::size_t dim() const override { return gp_.dim(); }
  double density(const Eigen::Ref<const Eigen::VectorXd>& x) const override { return gp_.predict_mean(x); }
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    return gp_.mean_gradient(x);
  }
  Eigen::MatrixXd hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    return gp_.mean_hessian(x);
  }

  /// GP correction to the prior mean.
  double correction(const Eigen::Ref<const Eigen::VectorXd>& x) const { return gp_.correction(x); }
  double density_variance(const Eigen::Ref<const Eigen::VectorXd>& x) const { return gp_.predict(x).variance; }
  Eigen::MatrixXd gradient_covariance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return gp_.gradient_covariance(x);
  }

  const gp::GpPosterior& gp() const { return gp_; }
  const PriorDescriptor& prior() const { return prior_; }

 private:
  gp::GpPosterior gp_;
  PriorDescriptor prior_;
};

struct TrainOptions {
  bool optimize = true;
  gp::OptimizeOptions optimizer;
};

struct TrainResult {
  LearnedHamiltonian model;
  double nlml_init = 0.0;
  double nlml_final = 0.0;
};

/// Fits the density GP on (state, density) rows, columns 0..n-1 the state
/// and column n the density value.
TrainResult train_hamiltonian_direct(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                     const gp::MeanFunction& prior_mean, const PriorDescriptor& prior,
                                     const gp::Hyperparams& h_init, const TrainOptions& opts = {});

/// Per-node gradient of the learned density.
Eigen::MatrixXd co_energy(const LearnedHamiltonian& lh, const core::StateField& state);

}  // namespace gpdphs::learn

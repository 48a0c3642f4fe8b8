// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/learn/hamiltonian.hpp"

#include <utility>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::learn {

LearnedHamiltonian::LearnedHamiltonian(gp::GpPosterior gp, PriorDescriptor prior)
    : gp_(std::move(gp)), prior_(std::move(prior)) {}

TrainResult train_hamiltonian_direct(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                     const gp::MeanFunction& prior_mean, const PriorDescriptor& prior,
                                     const gp::Hyperparams& h_init, const TrainOptions& opts) {
  if (samples.rows() < 1 || samples.cols() < 2) {
    throw DimensionError(fmt::format("density samples must be M x (n+1) with M >= 1, got {}x{}", samples.rows(),
                                     samples.cols()));
  }
  const Eigen::Index n = samples.cols() - 1;
  const Eigen::MatrixXd x = samples.leftCols(n);
  const Eigen::VectorXd y = samples.col(n);

  gp::Hyperparams h = h_init;
  double nlml_init = 0.0;
  double nlml_final = 0.0;
  if (opts.optimize && samples.rows() >= 2) {
    const auto r = gp::optimize_hyperparams(x, y, h_init, prior_mean, opts.optimizer);
    h = r.hyper;
    nlml_init = r.nlml_init;
    nlml_final = r.nlml_final;
  } else {
    nlml_init = gp::nlml(x, y, h_init, prior_mean);
    nlml_final = nlml_init;
  }
  auto post = gp::GpPosterior::fit(x, y, h, prior_mean);
  return TrainResult{LearnedHamiltonian(std::move(post), prior), nlml_init, nlml_final};
}

Eigen::MatrixXd co_energy(const LearnedHamiltonian& lh, const core::StateField& state) {
  return core::co_energy_field(lh, state);
}

}  // namespace gpdphs::learn

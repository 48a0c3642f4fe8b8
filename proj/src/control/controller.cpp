// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/control/controller.hpp"

#include <utility>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::control {

double QuadraticHc::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd d = x - target;
  return 0.5 * (xi.array() * d.array().square()).sum() - linear.dot(x);
}

Eigen::VectorXd QuadraticHc::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return xi.cwiseProduct(x - target) - linear;
}

ControllerPhs::ControllerPhs(Eigen::MatrixXd j_c, Eigen::MatrixXd g_c, QuadraticHc hc, Eigen::VectorXd x_c)
    : j_c_(std::move(j_c)), g_c_(std::move(g_c)), hc_(std::move(hc)), x_c_(std::move(x_c)) {
  const Eigen::Index n = j_c_.rows();
  if (n == 0 || j_c_.cols() != n || g_c_.rows() != n || hc_.xi.size() != n || hc_.target.size() != n ||
      hc_.linear.size() != n || x_c_.size() != n) {
    throw DimensionError(fmt::format("controller blocks are inconsistent with n_c = {}", n));
  }
  if ((j_c_ + j_c_.transpose()).norm() >= 1e-12) {
    throw InvariantError("J_c must be skew-symmetric");
  }
  if ((hc_.xi.array() < 0.0).any()) {
    throw InvariantError("controller gains Xi must be non-negative");
  }
}

ControllerPhs ControllerPhs::with_state(Eigen::VectorXd x_c) const {
  return ControllerPhs(j_c_, g_c_, hc_, std::move(x_c));
}

ControllerPhs ControllerPhs::with_g_c(Eigen::MatrixXd g_c) const {
  return ControllerPhs(j_c_, std::move(g_c), hc_, x_c_);
}

Eigen::VectorXd ControllerPhs::rhs(const Eigen::Ref<const Eigen::VectorXd>& x_c,
                                   const Eigen::Ref<const Eigen::VectorXd>& u_c) const {
  return j_c_ * hc_.gradient(x_c) + g_c_ * u_c;
}

Eigen::VectorXd ControllerPhs::output(const Eigen::Ref<const Eigen::VectorXd>& x_c) const {
  return g_c_.transpose() * hc_.gradient(x_c);
}

ControllerStep controller_step(const ControllerPhs& c, const Eigen::Ref<const Eigen::VectorXd>& u_c, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("controller_step needs dt > 0");
  }
  const Eigen::VectorXd& x = c.x_c();
  const Eigen::VectorXd k1 = c.rhs(x, u_c);
  const Eigen::VectorXd k2 = c.rhs(x + 0.5 * dt * k1, u_c);
  const Eigen::VectorXd k3 = c.rhs(x + 0.5 * dt * k2, u_c);
  const Eigen::VectorXd k4 = c.rhs(x + dt * k3, u_c);
  Eigen::VectorXd next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const Eigen::VectorXd y = c.output(next);
  return ControllerStep{c.with_state(std::move(next)), y};
}

}  // namespace gpdphs::control

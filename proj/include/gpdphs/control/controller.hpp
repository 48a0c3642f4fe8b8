// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace gpdphs::control {

/// H_c(x) = 1/2 sum_i xi_i (x_i - target_i)^2 - linear . x
struct QuadraticHc {
  Eigen::VectorXd xi;
  Eigen::VectorXd target;
  Eigen::VectorXd linear;

  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// dx_c/dt = J_c dH_c/dx_c + G_c u_c,  y_c = G_c^T dH_c/dx_c.
class ControllerPhs {
 public:
  ControllerPhs(Eigen::MatrixXd j_c, Eigen::MatrixXd g_c, QuadraticHc hc, Eigen::VectorXd x_c);

  std::size_t n_c() const { return static_cast<std::size_t>(j_c_.rows()); }
  const Eigen::MatrixXd& j_c() const { return j_c_; }
  const Eigen::MatrixXd& g_c() const { return g_c_; }
  const QuadraticHc& hc() const { return hc_; }
  const Eigen::VectorXd& x_c() const { return x_c_; }

  ControllerPhs with_state(Eigen::VectorXd x_c) const;
  ControllerPhs with_g_c(Eigen::MatrixXd g_c) const;

  Eigen::VectorXd rhs(const Eigen::Ref<const Eigen::VectorXd>& x_c,
                      const Eigen::Ref<const Eigen::VectorXd>& u_c) const;
  Eigen::VectorXd output(const Eigen::Ref<const Eigen::VectorXd>& x_c) const;

 private:
  Eigen::MatrixXd j_c_;
  Eigen::MatrixXd g_c_;
  QuadraticHc hc_;
  Eigen::VectorXd x_c_;
};

struct ControllerStep {
  ControllerPhs next;
  Eigen::VectorXd y_c;
};

/// One RK4 step with u_c held constant.
ControllerStep controller_step(const ControllerPhs& c, const Eigen::Ref<const Eigen::VectorXd>& u_c, double dt);

}  // namespace gpdphs::control

// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/core/boundary.hpp"

#include <cmath>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::core {

BoundaryPort boundary_port(const Eigen::Ref<const Eigen::VectorXd>& e_at_b,
                           const Eigen::Ref<const Eigen::VectorXd>& e_at_a,
                           const StructureMatrices& s) {
  const auto n = static_cast<Eigen::Index>(s.n());
  if (e_at_b.size() != n || e_at_a.size() != n) {
    throw DimensionError(fmt::format("boundary traces have sizes {} and {}, expected {}",
                                     e_at_b.size(), e_at_a.size(), n));
  }
  const double c = 1.0 / std::sqrt(2.0);
  return BoundaryPort{c * (s.p1() * (e_at_b - e_at_a)), c * (e_at_b + e_at_a)};
}

Eigen::MatrixXd boundary_port_map(const StructureMatrices& s) {
  const auto n = static_cast<Eigen::Index>(s.n());
  Eigen::MatrixXd r(2 * n, 2 * n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  r << s.p1(), -s.p1(), id, id;
  return r / std::sqrt(2.0);
}

Eigen::MatrixXd port_pairing(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  sigma.topRightCorner(k, k).setIdentity();
  sigma.bottomLeftCorner(k, k).setIdentity();
  return sigma;
}

std::vector<std::pair<std::string, bool>> IoValidationReport::checks() const {
  return {
      {"shape", shape_ok},
      {"W Sigma W^T = 0", shape_ok && w_sigma_w < kIoTolerance},
      {"W Sigma Wt^T = I", shape_ok && w_sigma_wt_minus_i < kIoTolerance},
      {"Wt Sigma Wt^T = 0", shape_ok && wt_sigma_wt < kIoTolerance},
      {"full rank", shape_ok && pass_rank},
      {"stacked invertible", shape_ok && stacked_min_singular > kIoTolerance},
  };
}

IoValidationReport validate_io_matrices(const BoundaryIoMatrices& m) {
  IoValidationReport rep;
  const Eigen::Index n = m.w.rows();
  rep.shape_ok = n > 0 && m.w.cols() == 2 * n && m.w_tilde.rows() == n && m.w_tilde.cols() == 2 * n &&
                 m.w.allFinite() && m.w_tilde.allFinite();
  if (!rep.shape_ok) {
    return rep;
  }
  const Eigen::MatrixXd sigma = port_pairing(static_cast<std::size_t>(n));
  rep.w_sigma_w = (m.w * sigma * m.w.transpose()).norm();
  rep.w_sigma_wt_minus_i =
      (m.w * sigma * m.w_tilde.transpose() - Eigen::MatrixXd::Identity(n, n)).norm();
  rep.wt_sigma_wt = (m.w_tilde * sigma * m.w_tilde.transpose()).norm();

  auto rank_of = [](const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    svd.setThreshold(kIoTolerance);
    return svd.rank();
  };
  rep.rank_w = rank_of(m.w);
  rep.rank_w_tilde = rank_of(m.w_tilde);
  rep.pass_rank = rep.rank_w == n && rep.rank_w_tilde == n;

  Eigen::MatrixXd stacked(2 * n, 2 * n);
  stacked << m.w, m.w_tilde;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  rep.stacked_min_singular = svd.singularValues().minCoeff();

  rep.pass = true;
  for (const auto& [name, ok] : rep.checks()) {
    rep.pass = rep.pass && ok;
  }
  return rep;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> boundary_io(const BoundaryPort& port,
                                                        const BoundaryIoMatrices& m) {
  const Eigen::Index n = port.f_bnd.size();
  if (port.e_bnd.size() != n || m.w.cols() != 2 * n || m.w_tilde.cols() != 2 * n) {
    throw DimensionError(fmt::format("boundary port of size {} does not match {}x{} IO matrices", n,
                                     m.w.rows(), m.w.cols()));
  }
  Eigen::VectorXd fe(2 * n);
  fe << port.f_bnd, port.e_bnd;
  return {m.w * fe, m.w_tilde * fe};
}

BoundaryIoMatrices io_matrices_from_traces(const StructureMatrices& s,
                                           std::span<const TraceSelector> inputs) {
  const auto n = static_cast<Eigen::Index>(s.n());
  if (static_cast<Eigen::Index>(inputs.size()) != n) {
    throw DimensionError(fmt::format("{} input traces selected, state dimension is {}", inputs.size(), n));
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> p1_lu(s.p1());
  if (!p1_lu.isInvertible()) {
    throw InvariantError("trace-selected boundary inputs need an invertible P1");
  }
  // Trace coordinates (e(b); e(a)); the port pairing pulls back to diag(P1, -P1).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& sel = inputs[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(sel.component) >= n) {
      throw DimensionError(fmt::format("trace component {} out of range", sel.component));
    }
    const Eigen::Index offset = sel.end == BoundaryEnd::kB ? 0 : n;
    a(i, offset + static_cast<Eigen::Index>(sel.component)) = 1.0;
  }
  const Eigen::MatrixXd p1_inv = p1_lu.inverse();
  Eigen::MatrixXd m_inv = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  m_inv.topLeftCorner(n, n) = p1_inv;
  m_inv.bottomRightCorner(n, n) = -p1_inv;

  if ((a * m_inv * a.transpose()).norm() > kIoTolerance) {
    throw InvariantError("selected boundary traces do not form a valid input (W Sigma W^T != 0)");
  }
  const Eigen::MatrixXd ma = m_inv * a.transpose();
  const Eigen::MatrixXd gram = ma.transpose() * ma;
  const Eigen::FullPivLU<Eigen::MatrixXd> gram_lu(gram);
  if (!gram_lu.isInvertible()) {
    throw InvariantError("selected boundary traces are linearly dependent");
  }
  Eigen::MatrixXd b = (ma * gram_lu.inverse()).transpose();
  const Eigen::MatrixXd c = b * m_inv * b.transpose();
  b -= 0.5 * c * a;

  const Eigen::MatrixXd r_inv = boundary_port_map(s).inverse();
  return BoundaryIoMatrices{a * r_inv, b * r_inv};
}

}  // namespace gpdphs::core

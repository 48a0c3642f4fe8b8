// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "gpdphs/simd/kernels.hpp"

namespace gpdphs::simd::scalar {

void se_kernel_row(std::span<const double> x_scaled, const double* train, std::size_t n_train,
                   std::size_t stride, double sigma_f2, std::span<double> out) {
  const std::size_t d = x_scaled.size();
  for (std::size_t i = 0; i < n_train; ++i) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = x_scaled[k] - train[k * stride + i];
      r2 += diff * diff;
    }
    out[i] = sigma_f2 * std::exp(-0.5 * r2);
  }
}

void exp_inplace(std::span<double> v) {
  for (double& x : v) x = std::exp(x);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

void central_difference(std::span<const double> f, double inv_2h, std::span<double> out) {
  const std::size_t n = f.size();
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv_2h;
}

}  // namespace gpdphs::simd::scalar

// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops shared by the GP and the method-of-lines code.
//
// Every kernel has a scalar reference implementation and an AVX2/FMA
// variant. The public entry points in namespace gpdphs::simd dispatch at
// run time to the widest variant the host supports; the per-ISA namespaces
// are exposed so tests can compare them directly.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace gpdphs::simd {

enum class Isa { kScalar, kAvx2 };

/// Widest ISA usable on this host (ignores any override).
Isa detected_isa();

/// ISA used by the dispatching entry points. Honors set_isa() and the
/// GPDPHS_SIMD environment variable ("scalar" or "avx2").
Isa active_isa();

/// Force an ISA for the dispatching entry points. Requesting AVX2 on a host
/// without it falls back to scalar.
void set_isa(Isa isa);

std::string_view isa_name(Isa isa);

// Input layout for se_kernel_row: the training inputs are stored
// structure-of-arrays, component k of point i at train[k * stride + i],
// already divided by the per-dimension length scale.

namespace scalar {
void se_kernel_row(std::span<const double> x_scaled, const double* train, std::size_t n_train,
                   std::size_t stride, double sigma_f2, std::span<double> out);
void exp_inplace(std::span<double> v);
double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
void central_difference(std::span<const double> f, double inv_2h, std::span<double> out);
}  // namespace scalar

namespace avx2 {
bool supported();
void se_kernel_row(std::span<const double> x_scaled, const double* train, std::size_t n_train,
                   std::size_t stride, double sigma_f2, std::span<double> out);
void exp_inplace(std::span<double> v);
double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
void central_difference(std::span<const double> f, double inv_2h, std::span<double> out);
}  // namespace avx2

/// out[i] = sigma_f2 * exp(-0.5 * sum_k (x_scaled[k] - train[k*stride + i])^2)
void se_kernel_row(std::span<const double> x_scaled, const double* train, std::size_t n_train,
                   std::size_t stride, double sigma_f2, std::span<double> out);

void exp_inplace(std::span<double> v);

double dot(std::span<const double> a, std::span<const double> b);

/// sum_i w[i] * a[i] * b[i]
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);

/// Interior points only: out[i] = (f[i+1] - f[i-1]) * inv_2h for 1 <= i < n-1.
/// out[0] and out[n-1] are left untouched.
void central_difference(std::span<const double> f, double inv_2h, std::span<double> out);

}  // namespace gpdphs::simd

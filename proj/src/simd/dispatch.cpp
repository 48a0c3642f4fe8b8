// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "gpdphs/simd/kernels.hpp"

namespace gpdphs::simd {
namespace {

Isa initial_isa() {
  Isa isa = avx2::supported() ? Isa::kAvx2 : Isa::kScalar;
  if (const char* env = std::getenv("GPDPHS_SIMD")) {
    const std::string v(env);
    if (v == "scalar") isa = Isa::kScalar;
  }
  return isa;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

Isa detected_isa() { return avx2::supported() ? Isa::kAvx2 : Isa::kScalar; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2::supported()) isa = Isa::kScalar;
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

void se_kernel_row(std::span<const double> x_scaled, const double* train, std::size_t n_train,
                   std::size_t stride, double sigma_f2, std::span<double> out) {
  if (active_isa() == Isa::kAvx2) {
    avx2::se_kernel_row(x_scaled, train, n_train, stride, sigma_f2, out);
  } else {
    scalar::se_kernel_row(x_scaled, train, n_train, stride, sigma_f2, out);
  }
}

void exp_inplace(std::span<double> v) {
  if (active_isa() == Isa::kAvx2) {
    avx2::exp_inplace(v);
  } else {
    scalar::exp_inplace(v);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active_isa() == Isa::kAvx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  return active_isa() == Isa::kAvx2 ? avx2::weighted_dot(w, a, b) : scalar::weighted_dot(w, a, b);
}

void central_difference(std::span<const double> f, double inv_2h, std::span<double> out) {
  if (active_isa() == Isa::kAvx2) {
    avx2::central_difference(f, inv_2h, out);
  } else {
    scalar::central_difference(f, inv_2h, out);
  }
}

}  // namespace gpdphs::simd

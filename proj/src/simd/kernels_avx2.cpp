// SPDX-License-Identifier: Apache-2.0
//
// AVX2/FMA variants. This file is the only one compiled with -mavx2 -mfma;
// nothing here may be called unless avx2::supported() is true.

#include <immintrin.h>

#include <array>
#include <cstdint>

#include "gpdphs/simd/kernels.hpp"

namespace gpdphs::simd::avx2 {
namespace {

// exp(x) = 2^k * exp(r), |r| <= ln2/2, with a degree-13 Taylor polynomial
// for exp(r). Truncation error is below 1e-17 relative on the reduced range.
// Inputs below -708.39 return 0 (the true value is subnormal).
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.39);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  const __m256d xc = _mm256_max_pd(_mm256_min_pd(x, hi), lo);
  const __m256d k =
      _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, xc);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  static constexpr std::array<double, 14> c = {
      1.0,
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0,
  };
  __m256d p = _mm256_set1_pd(c[13]);
  for (int i = 12; i >= 0; --i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));

  const __m128i k32 = _mm256_cvtpd_epi32(k);
  const __m256i biased = _mm256_add_epi64(_mm256_cvtepi32_epi64(k32), _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
  return _mm256_blendv_pd(_mm256_mul_pd(p, scale), _mm256_setzero_pd(), underflow);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

bool supported() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void se_kernel_row(std::span<const double> x_scaled, const double* train, std::size_t n_train,
                   std::size_t stride, double sigma_f2, std::span<double> out) {
  const std::size_t d = x_scaled.size();
  const __m256d neg_half = _mm256_set1_pd(-0.5);
  const __m256d sf2 = _mm256_set1_pd(sigma_f2);
  std::size_t i = 0;
  for (; i + 4 <= n_train; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < d; ++k) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_set1_pd(x_scaled[k]), _mm256_loadu_pd(train + k * stride + i));
      acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(sf2, exp_pd(_mm256_mul_pd(neg_half, acc))));
  }
  if (i < n_train) {
    // Tail through a padded lane buffer so every entry uses the same exp.
    alignas(32) std::array<double, 4> r2{};
    for (std::size_t j = i; j < n_train; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = x_scaled[k] - train[k * stride + j];
        s = __builtin_fma(diff, diff, s);
      }
      r2[j - i] = s;
    }
    const __m256d v = _mm256_mul_pd(sf2, exp_pd(_mm256_mul_pd(neg_half, _mm256_load_pd(r2.data()))));
    _mm256_store_pd(r2.data(), v);
    for (std::size_t j = i; j < n_train; ++j) out[j] = r2[j - i];
  }
}

void exp_inplace(std::span<double> v) {
  std::size_t i = 0;
  for (; i + 4 <= v.size(); i += 4) {
    _mm256_storeu_pd(v.data() + i, exp_pd(_mm256_loadu_pd(v.data() + i)));
  }
  if (i < v.size()) {
    alignas(32) std::array<double, 4> buf{};
    for (std::size_t j = i; j < v.size(); ++j) buf[j - i] = v[j];
    _mm256_store_pd(buf.data(), exp_pd(_mm256_load_pd(buf.data())));
    for (std::size_t j = i; j < v.size(); ++j) v[j] = buf[j - i];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc);
  }
  double s = hsum(acc);
  for (; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= w.size(); i += 4) {
    const __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w.data() + i), _mm256_loadu_pd(a.data() + i));
    acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b.data() + i), acc);
  }
  double s = hsum(acc);
  for (; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

void central_difference(std::span<const double> f, double inv_2h, std::span<double> out) {
  const std::size_t n = f.size();
  if (n < 3) return;
  const __m256d scale = _mm256_set1_pd(inv_2h);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const __m256d diff =
        _mm256_sub_pd(_mm256_loadu_pd(f.data() + i + 1), _mm256_loadu_pd(f.data() + i - 1));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(diff, scale));
  }
  for (; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv_2h;
}

}  // namespace gpdphs::simd::avx2

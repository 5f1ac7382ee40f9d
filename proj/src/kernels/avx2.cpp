// Copyright 2026 The T3L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "t3l/kernels/kernels.hpp"

namespace t3l::kernels {
namespace {

// Shared register-blocked core for gemm_nn and gemm_tn. Row r of A at inner
// index p lives at a[r * a_row_stride + p * a_inner_stride].
template <int Rows>
inline void block_rows(std::size_t n, std::size_t k, const double* a,
                       std::size_t a_row_stride, std::size_t a_inner_stride,
                       const double* b, double* c, bool accumulate) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d acc0[Rows];
    __m256d acc1[Rows];
    for (int r = 0; r < Rows; ++r) {
      acc0[r] = accumulate ? _mm256_loadu_pd(c + r * n + j) : _mm256_setzero_pd();
      acc1[r] = accumulate ? _mm256_loadu_pd(c + r * n + j + 4) : _mm256_setzero_pd();
    }
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
      for (int r = 0; r < Rows; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + r * a_row_stride + p * a_inner_stride);
        acc0[r] = _mm256_fmadd_pd(av, b0, acc0[r]);
        acc1[r] = _mm256_fmadd_pd(av, b1, acc1[r]);
      }
    }
    for (int r = 0; r < Rows; ++r) {
      _mm256_storeu_pd(c + r * n + j, acc0[r]);
      _mm256_storeu_pd(c + r * n + j + 4, acc1[r]);
    }
  }
  for (; j + 4 <= n; j += 4) {
    __m256d acc[Rows];
    for (int r = 0; r < Rows; ++r) {
      acc[r] = accumulate ? _mm256_loadu_pd(c + r * n + j) : _mm256_setzero_pd();
    }
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d bv = _mm256_loadu_pd(b + p * n + j);
      for (int r = 0; r < Rows; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + r * a_row_stride + p * a_inner_stride);
        acc[r] = _mm256_fmadd_pd(av, bv, acc[r]);
      }
    }
    for (int r = 0; r < Rows; ++r) _mm256_storeu_pd(c + r * n + j, acc[r]);
  }
  for (; j < n; ++j) {
    for (int r = 0; r < Rows; ++r) {
      double acc = accumulate ? c[r * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        acc = std::fma(a[r * a_row_stride + p * a_inner_stride], b[p * n + j], acc);
      }
      c[r * n + j] = acc;
    }
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) block_rows<4>(n, k, a + i * k, k, 1, b, c + i * n, accumulate);
  for (; i < m; ++i) block_rows<1>(n, k, a + i * k, k, 1, b, c + i * n, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) block_rows<4>(n, k, a + i, 1, m, b, c + i * n, accumulate);
  for (; i < m; ++i) block_rows<1>(n, k, a + i, 1, m, b, c + i * n, accumulate);
}

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

inline double dot_impl(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + p), _mm256_loadu_pd(y + p), acc);
  }
  double sum = horizontal_sum(acc);
  for (; p < n; ++p) sum = std::fma(x[p], y[p], sum);
  return sum;
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = dot_impl(k, arow, b + j * k);
      c[i * n + j] = accumulate ? c[i * n + j] + v : v;
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

double dot(std::size_t n, const double* x, const double* y) { return dot_impl(n, x, y); }

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", gemm_nn, gemm_nt, gemm_tn, axpy, dot};
  return table;
}

}  // namespace t3l::kernels

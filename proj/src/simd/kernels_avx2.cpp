// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include "plapdg/simd/kernels.hpp"

namespace plapdg::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double dot(const double* a, const double* b, int n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  int q = 0;
  for (; q + 8 <= n; q += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + q), _mm256_loadu_pd(b + q), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + q + 4), _mm256_loadu_pd(b + q + 4), acc1);
  }
  if (q + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + q), _mm256_loadu_pd(b + q), acc0);
    q += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; q < n; ++q) s += a[q] * b[q];
  return s;
}

void gemv_acc_avx2(const double* X, int m, int n, const double* y, double* out) {
  for (int i = 0; i < m; ++i) out[i] += dot(X + static_cast<long>(i) * n, y, n);
}

void contract_avx2(const double* c, const double* X, int m, int n, double* out) {
  for (int i = 0; i < m; ++i) {
    const double* row = X + static_cast<long>(i) * n;
    const __m256d ci = _mm256_set1_pd(c[i]);
    int q = 0;
    for (; q + 4 <= n; q += 4) {
      _mm256_storeu_pd(out + q, _mm256_fmadd_pd(ci, _mm256_loadu_pd(row + q), _mm256_loadu_pd(out + q)));
    }
    for (; q < n; ++q) out[q] += c[i] * row[q];
  }
}

// 1x4 register block: one row of X against four rows of Y.
void gram_acc_avx2(const double* X, int mx, const double* Y, int my, int n, double* A, int lda) {
  for (int i = 0; i < mx; ++i) {
    const double* xi = X + static_cast<long>(i) * n;
    int j = 0;
    for (; j + 4 <= my; j += 4) {
      const double* y0 = Y + static_cast<long>(j) * n;
      const double* y1 = y0 + n;
      const double* y2 = y1 + n;
      const double* y3 = y2 + n;
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      int q = 0;
      for (; q + 4 <= n; q += 4) {
        const __m256d x = _mm256_loadu_pd(xi + q);
        a0 = _mm256_fmadd_pd(x, _mm256_loadu_pd(y0 + q), a0);
        a1 = _mm256_fmadd_pd(x, _mm256_loadu_pd(y1 + q), a1);
        a2 = _mm256_fmadd_pd(x, _mm256_loadu_pd(y2 + q), a2);
        a3 = _mm256_fmadd_pd(x, _mm256_loadu_pd(y3 + q), a3);
      }
      double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
      for (; q < n; ++q) {
        s0 += xi[q] * y0[q];
        s1 += xi[q] * y1[q];
        s2 += xi[q] * y2[q];
        s3 += xi[q] * y3[q];
      }
      double* row = A + i * lda + j;
      row[0] += s0;
      row[1] += s1;
      row[2] += s2;
      row[3] += s3;
    }
    for (; j < my; ++j) A[i * lda + j] += dot(xi, Y + static_cast<long>(j) * n, n);
  }
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{gemv_acc_avx2, contract_avx2, gram_acc_avx2};
  return table;
}

}  // namespace plapdg::simd

// SPDX-License-Identifier: Apache-2.0
//
// Dense contractions over quadrature points. Tables are basis-major: row i
// of an m x n table holds basis function i at the n quadrature points.
//
// Every kernel has a scalar reference implementation and an AVX2/FMA
// variant; the variant is picked once at startup from CPUID. Setting
// PLAPDG_SIMD=scalar in the environment forces the reference path.
#pragma once

#include <string_view>

namespace plapdg::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  // out[i] += sum_q X[i*n + q] * y[q],  i < m
  void (*gemv_acc)(const double* X, int m, int n, const double* y, double* out);
  // out[q] += sum_i c[i] * X[i*n + q],  q < n
  void (*contract)(const double* c, const double* X, int m, int n, double* out);
  // A[i*lda + j] += sum_q X[i*n + q] * Y[j*n + q],  i < mx, j < my
  void (*gram_acc)(const double* X, int mx, const double* Y, int my, int n, double* A, int lda);
};

const KernelTable& scalar_kernels();
#if defined(PLAPDG_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

bool isa_supported(Isa isa);
Isa active_isa();
std::string_view isa_name(Isa isa);
const KernelTable& kernels_for(Isa isa);
const KernelTable& kernels();

inline void gemv_acc(const double* X, int m, int n, const double* y, double* out) {
  kernels().gemv_acc(X, m, n, y, out);
}
inline void contract(const double* c, const double* X, int m, int n, double* out) {
  kernels().contract(c, X, m, n, out);
}
inline void gram_acc(const double* X, int mx, const double* Y, int my, int n, double* A, int lda) {
  kernels().gram_acc(X, mx, Y, my, n, A, lda);
}

}  // namespace plapdg::simd

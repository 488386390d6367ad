// SPDX-License-Identifier: Apache-2.0
#include "plapdg/simd/kernels.hpp"

namespace plapdg::simd {

namespace {

void gemv_acc_scalar(const double* X, int m, int n, const double* y, double* out) {
  for (int i = 0; i < m; ++i) {
    const double* row = X + static_cast<long>(i) * n;
    double s = 0.0;
    for (int q = 0; q < n; ++q) s += row[q] * y[q];
    out[i] += s;
  }
}

void contract_scalar(const double* c, const double* X, int m, int n, double* out) {
  for (int i = 0; i < m; ++i) {
    const double* row = X + static_cast<long>(i) * n;
    const double ci = c[i];
    for (int q = 0; q < n; ++q) out[q] += ci * row[q];
  }
}

void gram_acc_scalar(const double* X, int mx, const double* Y, int my, int n, double* A, int lda) {
  for (int i = 0; i < mx; ++i) {
    const double* xi = X + static_cast<long>(i) * n;
    for (int j = 0; j < my; ++j) {
      const double* yj = Y + static_cast<long>(j) * n;
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += xi[q] * yj[q];
      A[i * lda + j] += s;
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{gemv_acc_scalar, contract_scalar, gram_acc_scalar};
  return table;
}

}  // namespace plapdg::simd

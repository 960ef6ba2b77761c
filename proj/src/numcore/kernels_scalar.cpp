#include "kernels_internal.hpp"

namespace lmol::inline LMOL_PRECISION_NS::kernels::detail {
namespace {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const real* a, std::size_t lda,
             const real* b, std::size_t ldb, real* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    real* crow = c + i * ldc;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = real(0);
    }
    const real* arow = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const real av = arow[p];
      const real* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const real* a, std::size_t lda,
             const real* b, std::size_t ldb, real* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    real* crow = c + i * ldc;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = real(0);
    }
    for (std::size_t p = 0; p < k; ++p) {
      const real av = a[p * lda + i];
      const real* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

real dot(std::size_t n, const real* a, const real* b) {
  real acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(std::size_t n, real alpha, const real* x, real* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Isa::kScalar, &gemm_nn, &gemm_tn, &dot, &axpy};
  return t;
}

}  // namespace lmol::kernels::detail

// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check.
#include "kernels_internal.hpp"

#ifdef LMOL_HAVE_AVX2_TABLE

#include <immintrin.h>

#include <cmath>

namespace lmol::inline LMOL_PRECISION_NS::kernels::detail {
namespace {

// Accumulates a block of `rows` x 16 outputs. A(i, p) lives at
// a[i * row_stride + p * k_stride], so the same body serves A and A^T.
template <int Rows>
inline void block16(std::size_t k, const float* a, std::size_t row_stride, std::size_t k_stride,
                    const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
  __m256 acc0[Rows];
  __m256 acc1[Rows];
  for (int r = 0; r < Rows; ++r) {
    if (accumulate) {
      acc0[r] = _mm256_loadu_ps(c + r * ldc);
      acc1[r] = _mm256_loadu_ps(c + r * ldc + 8);
    } else {
      acc0[r] = _mm256_setzero_ps();
      acc1[r] = _mm256_setzero_ps();
    }
  }
  for (std::size_t p = 0; p < k; ++p) {
    const float* brow = b + p * ldb;
    const __m256 b0 = _mm256_loadu_ps(brow);
    const __m256 b1 = _mm256_loadu_ps(brow + 8);
    for (int r = 0; r < Rows; ++r) {
      const __m256 av = _mm256_set1_ps(a[r * row_stride + p * k_stride]);
      acc0[r] = _mm256_fmadd_ps(av, b0, acc0[r]);
      acc1[r] = _mm256_fmadd_ps(av, b1, acc1[r]);
    }
  }
  for (int r = 0; r < Rows; ++r) {
    _mm256_storeu_ps(c + r * ldc, acc0[r]);
    _mm256_storeu_ps(c + r * ldc + 8, acc1[r]);
  }
}

template <int Rows>
inline void block8(std::size_t k, const float* a, std::size_t row_stride, std::size_t k_stride,
                   const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
  __m256 acc[Rows];
  for (int r = 0; r < Rows; ++r) {
    acc[r] = accumulate ? _mm256_loadu_ps(c + r * ldc) : _mm256_setzero_ps();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256 bv = _mm256_loadu_ps(b + p * ldb);
    for (int r = 0; r < Rows; ++r) {
      acc[r] = _mm256_fmadd_ps(_mm256_set1_ps(a[r * row_stride + p * k_stride]), bv, acc[r]);
    }
  }
  for (int r = 0; r < Rows; ++r) _mm256_storeu_ps(c + r * ldc, acc[r]);
}

// Scalar column tail; std::fma keeps each element's rounding identical to the
// vector lanes.
template <int Rows>
inline void block_tail(std::size_t cols, std::size_t k, const float* a, std::size_t row_stride,
                       std::size_t k_stride, const float* b, std::size_t ldb, float* c,
                       std::size_t ldc, bool accumulate) {
  for (int r = 0; r < Rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      float acc = accumulate ? c[r * ldc + j] : 0.0f;
      for (std::size_t p = 0; p < k; ++p) {
        acc = std::fma(a[r * row_stride + p * k_stride], b[p * ldb + j], acc);
      }
      c[r * ldc + j] = acc;
    }
  }
}

template <int Rows>
inline void row_block(std::size_t n, std::size_t k, const float* a, std::size_t row_stride,
                      std::size_t k_stride, const float* b, std::size_t ldb, float* c,
                      std::size_t ldc, bool accumulate) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    block16<Rows>(k, a, row_stride, k_stride, b + j, ldb, c + j, ldc, accumulate);
  }
  for (; j + 8 <= n; j += 8) {
    block8<Rows>(k, a, row_stride, k_stride, b + j, ldb, c + j, ldc, accumulate);
  }
  if (j < n) block_tail<Rows>(n - j, k, a, row_stride, k_stride, b + j, ldb, c + j, ldc, accumulate);
}

void gemm_strided(std::size_t m, std::size_t n, std::size_t k, const float* a,
                  std::size_t row_stride, std::size_t k_stride, const float* b, std::size_t ldb,
                  float* c, std::size_t ldc, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    row_block<4>(n, k, a + i * row_stride, row_stride, k_stride, b, ldb, c + i * ldc, ldc,
                 accumulate);
  }
  for (; i < m; ++i) {
    row_block<1>(n, k, a + i * row_stride, row_stride, k_stride, b, ldb, c + i * ldc, ldc,
                 accumulate);
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
  gemm_strided(m, n, k, a, lda, 1, b, ldb, c, ldc, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
  gemm_strided(m, n, k, a, 1, lda, b, ldb, c, ldc, accumulate);
}

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

float dot(std::size_t n, const float* a, const float* b) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  float acc = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

void axpy(std::size_t n, float alpha, const float* x, float* y) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const Table& avx2_table() {
  static const Table t{Isa::kAvx2, &gemm_nn, &gemm_tn, &dot, &axpy};
  return t;
}

}  // namespace lmol::kernels::detail

#endif  // LMOL_HAVE_AVX2_TABLE

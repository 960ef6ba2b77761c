#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "lmol/numcore/tensor.hpp"

// Differentiable tensor operations. Each op records its backward closure on
// the active Tape when any input requires a gradient; without an active tape
// the ops are plain functions.
namespace lmol::inline LMOL_PRECISION_NS {

// Additive sentinel standing in for -inf in attention masks.
inline constexpr real kMaskValue = real(-1e9);

// Finite-value checking of op outputs (on by default). Violations throw
// NumericError naming the op.
void set_finite_checks(bool on) noexcept;
bool finite_checks() noexcept;

// rank-2 x rank-2, rank-3 x rank-3 (batched) or rank-3 x rank-2 (shared rhs).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, real factor);
// a[R, C] + v[C] broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& v);
// column vector x[R] (or [R,1]) times row vector w[C] -> [R, C].
Tensor outer(const Tensor& x, const Tensor& w);
Tensor sum(const Tensor& a);
Tensor silu(const Tensor& a);

// Softmax over the trailing axis with max subtraction. Entries equal to -inf
// or at/below half the mask sentinel receive probability exactly 0; a slice
// with no other entry throws NumericError.
Tensor softmax_rows(const Tensor& x);

// Mean of -log softmax(logits[i])[targets[i]] over positions whose target is
// not ignore_id. When normalizer > 0 the sum is divided by it instead of the
// count (gradient accumulation across micro-batches). With every position
// ignored the result is 0.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets, int ignore_id,
                     real normalizer = 0);

// Row-wise x / sqrt(mean(x^2) + eps) * gain.
Tensor rmsnorm(const Tensor& x, const Tensor& gain, real eps = real(1e-5));

// Rotary embedding of every head slice of x[R, n_heads * d_head]; row r is
// rotated for position positions[r].
Tensor rope(const Tensor& x, std::span<const std::size_t> positions, std::size_t n_heads,
            real base);

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor reshape(const Tensor& a, Shape shape);

// Inverted dropout; identity when !training or p == 0.
Tensor dropout(const Tensor& x, real p, bool training, std::mt19937_64* rng);

// Lower-triangular-permitting mask matrix: 0 on and below the diagonal,
// kMaskValue above it.
Tensor causal_mask(std::size_t length);

// Packed causal multi-head attention. q, k, v are [R, n_heads * d_head];
// segments are half-open row ranges [offsets[s], offsets[s+1]) holding one
// sequence each, so attention never crosses a segment. Per head:
// softmax(Q K^T / sqrt(d_head) + M) V. When weights is non-null it receives
// the attention probabilities laid out [segment][head][i][j] with each block
// len x len.
Tensor causal_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                        std::span<const std::size_t> offsets, std::size_t n_heads,
                        std::vector<real>* weights = nullptr);

}  // namespace lmol

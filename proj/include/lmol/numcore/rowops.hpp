#pragma once

#include <cstddef>

#include "lmol/numcore/real.hpp"

// Single-row primitives shared by the differentiable ops and the incremental
// decoder, so both paths perform bit-identical arithmetic.
namespace lmol::inline LMOL_PRECISION_NS::rowops {

// out = x / sqrt(mean(x^2) + eps) * gain; returns 1 / sqrt(mean(x^2) + eps).
real rmsnorm(std::size_t n, const real* x, const real* gain, real eps, real* out);

// Rotates (x[2i], x[2i+1]) of each d_head slice by pos * base^(-2i / d_head).
// sign = -1 applies the inverse rotation.
void rope(std::size_t n_heads, std::size_t d_head, std::size_t pos, real base, real* x,
          real sign = real(1));

real silu(real x);

// One query row against n_total key rows of which the first n_visible are
// unmasked. probs receives n_total probabilities (exact zeros when masked);
// out receives the d-dimensional weighted value sum.
void attend(std::size_t d, const real* q, const real* keys, std::size_t key_stride,
            const real* values, std::size_t value_stride, std::size_t n_visible,
            std::size_t n_total, real scale, real* probs, real* out);

}  // namespace lmol::rowops

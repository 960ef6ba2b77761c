#include "lmol/numcore/rowops.hpp"

#include <cmath>

#include "lmol/numcore/kernels.hpp"
#include "lmol/numcore/ops.hpp"

namespace lmol::inline LMOL_PRECISION_NS::rowops {

real rmsnorm(std::size_t n, const real* x, const real* gain, real eps, real* out) {
  const real ms = kernels::active().dot(n, x, x) / static_cast<real>(n);
  const real inv = real(1) / std::sqrt(ms + eps);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * inv * gain[i];
  return inv;
}

void rope(std::size_t n_heads, std::size_t d_head, std::size_t pos, real base, real* x,
          real sign) {
  const std::size_t half = d_head / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double inv_freq =
        std::pow(static_cast<double>(base), -2.0 * static_cast<double>(i) / static_cast<double>(d_head));
    const double angle = static_cast<double>(pos) * inv_freq;
    const real c = static_cast<real>(std::cos(angle));
    const real s = static_cast<real>(sign * std::sin(angle));
    for (std::size_t h = 0; h < n_heads; ++h) {
      real* pair = x + h * d_head + 2 * i;
      const real a = pair[0];
      const real b = pair[1];
      pair[0] = a * c - b * s;
      pair[1] = a * s + b * c;
    }
  }
}

real silu(real x) { return x / (real(1) + std::exp(-x)); }

void attend(std::size_t d, const real* q, const real* keys, std::size_t key_stride,
            const real* values, std::size_t value_stride, std::size_t n_visible,
            std::size_t n_total, real scale, real* probs, real* out) {
  const auto& k = kernels::active();
  real mx = kMaskValue;
  for (std::size_t j = 0; j < n_total; ++j) {
    const real s = j < n_visible ? k.dot(d, q, keys + j * key_stride) * scale : kMaskValue;
    probs[j] = s;
    if (s > mx) mx = s;
  }
  real total = 0;
  for (std::size_t j = 0; j < n_total; ++j) {
    probs[j] = std::exp(probs[j] - mx);
    total += probs[j];
  }
  const real inv = real(1) / total;
  for (std::size_t j = 0; j < n_total; ++j) probs[j] *= inv;
  for (std::size_t i = 0; i < d; ++i) out[i] = 0;
  for (std::size_t j = 0; j < n_visible; ++j) k.axpy(d, probs[j], values + j * value_stride, out);
}

}  // namespace lmol::rowops

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lmol/numcore/tensor.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct AdamOptions {
  real alpha = real(1e-4);
  real beta1 = real(0.9);
  real beta2 = real(0.95);
  real epsilon = real(1e-8);
};

// Bias-corrected Adam over a fixed, ordered parameter list. The step counter
// is global; parameters that received no gradient since the previous step
// keep their value and moments.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options);

  // Applies one update and zeroes every gradient. Throws StateError when a
  // parameter has no gradient buffer.
  void step();

  std::uint64_t steps() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return options_; }
  const std::vector<Tensor>& params() const noexcept { return params_; }

  // Moment buffers, index-aligned with params(); exposed for checkpointing.
  std::vector<std::vector<real>>& first_moments() noexcept { return m_; }
  std::vector<std::vector<real>>& second_moments() noexcept { return v_; }
  const std::vector<std::vector<real>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<real>>& second_moments() const noexcept { return v_; }
  void set_steps(std::uint64_t t) noexcept { t_ = t; }

 private:
  std::vector<Tensor> params_;
  AdamOptions options_;
  std::vector<std::vector<real>> m_;
  std::vector<std::vector<real>> v_;
  std::uint64_t t_ = 0;
};

// Scales every gradient so their joint L2 norm is at most max_norm; returns
// the norm before clipping.
real clip_grad_norm(std::span<Tensor> params, real max_norm);

}  // namespace lmol

#include "lmol/numcore/adam.hpp"

#include <cmath>

#include "lmol/error.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.numel(), real(0));
    v_.emplace_back(p.numel(), real(0));
  }
}

void Adam::step() {
  for (const Tensor& p : params_) {
    if (!p.has_grad()) throw StateError("adam step: parameter without a gradient buffer");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(static_cast<double>(options_.beta1), static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(static_cast<double>(options_.beta2), static_cast<double>(t_));
  const real b1 = options_.beta1, b2 = options_.beta2;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    auto& node = *p.node();
    if (!node.grad_touched) continue;
    auto w = p.mutable_data();
    const auto g = p.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (real(1) - b1) * g[j];
      v[j] = b2 * v[j] + (real(1) - b2) * g[j] * g[j];
      const real mhat = static_cast<real>(m[j] / bc1);
      const real vhat = static_cast<real>(v[j] / bc2);
      w[j] -= options_.alpha * mhat / (std::sqrt(vhat) + options_.epsilon);
    }
    p.zero_grad();
  }
}

real clip_grad_norm(std::span<Tensor> params, real max_norm) {
  double sq = 0;
  for (const Tensor& p : params) {
    for (real g : p.grad()) sq += static_cast<double>(g) * g;
  }
  const real norm = static_cast<real>(std::sqrt(sq));
  if (norm > max_norm && norm > 0) {
    const real f = max_norm / norm;
    for (Tensor& p : params) {
      for (real& g : p.mutable_grad()) g *= f;
    }
  }
  return norm;
}

}  // namespace lmol

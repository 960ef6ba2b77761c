#include "lmol/model/transformer.hpp"

#include <cmath>

#include "lmol/error.hpp"
#include "lmol/numcore/kernels.hpp"
#include "lmol/numcore/ops.hpp"
#include "lmol/numcore/rowops.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

Tensor forward(const ModelParams& params, const Tensor& x, std::span<const std::size_t> offsets,
               const ForwardOptions& options) {
  const ModelConfig& c = params.config;
  if (x.rank() != 2 || x.dim(1) != c.d_emb) {
    throw ShapeError("forward: input must be [rows, " + std::to_string(c.d_emb) + "], got " +
                     shape_string(x.shape()));
  }
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != x.dim(0)) {
    throw ShapeError("forward: segment offsets must cover all rows");
  }
  std::vector<std::size_t> positions(x.dim(0));
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t len = offsets[s + 1] - offsets[s];
    if (len > c.max_total_len()) {
      throw LengthError("forward: sequence of " + std::to_string(len) + " rows exceeds limit " +
                        std::to_string(c.max_total_len()));
    }
    for (std::size_t i = 0; i < len; ++i) positions[offsets[s] + i] = i;
  }
  if (options.attention) options.attention->assign(c.n_layers, {});

  Tensor h = x;
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    const LayerParams& L = params.layers[l];
    const Tensor n1 = rmsnorm(h, L.attn_gain);
    const Tensor q = rope(matmul(n1, L.wq), positions, c.n_heads, c.rope_base);
    const Tensor k = rope(matmul(n1, L.wk), positions, c.n_heads, c.rope_base);
    const Tensor v = matmul(n1, L.wv);
    const Tensor a = causal_attention(q, k, v, offsets, c.n_heads,
                                      options.attention ? &(*options.attention)[l] : nullptr);
    h = add(h, matmul(a, L.wo));
    const Tensor n2 = rmsnorm(h, L.ffn_gain);
    const Tensor gated = mul(silu(matmul(n2, L.w1)), matmul(n2, L.w3));
    h = add(h, dropout(matmul(gated, L.w2), c.dropout, options.training, options.rng));
  }
  return matmul(rmsnorm(h, params.final_gain), params.output);
}

Tensor forward(const ModelParams& params, const Tensor& x, const ForwardOptions& options) {
  const std::size_t offsets[] = {0, x.rank() == 2 ? x.dim(0) : 0};
  return forward(params, x, offsets, options);
}

Decoder::Decoder(const ModelParams& params) : params_(params), capacity_(params.config.max_total_len()) {
  const ModelConfig& c = params.config;
  keys_.assign(c.n_layers, std::vector<real>(capacity_ * c.d_emb));
  values_.assign(c.n_layers, std::vector<real>(capacity_ * c.d_emb));
  for (auto* buf : {&x_, &h_, &q_, &k_, &v_, &attn_, &proj_}) buf->resize(c.d_emb);
  a_.resize(c.d_ffn);
  b_.resize(c.d_ffn);
  probs_.resize(capacity_);
  logits_.resize(c.d_voc);
}

std::span<const real> Decoder::step(std::span<const real> row) {
  const ModelConfig& c = params_.config;
  const std::size_t d = c.d_emb, dh = c.d_head(), f = c.d_ffn;
  if (row.size() != d) throw ShapeError("decoder: row must have d_emb values");
  if (length_ >= capacity_) throw LengthError("decoder: sequence exceeds " + std::to_string(capacity_));
  const auto& kt = kernels::active();
  const real scale = real(1) / std::sqrt(static_cast<real>(dh));
  const std::size_t pos = length_;
  std::copy(row.begin(), row.end(), x_.begin());

  for (std::size_t l = 0; l < c.n_layers; ++l) {
    const LayerParams& L = params_.layers[l];
    rowops::rmsnorm(d, x_.data(), L.attn_gain.data().data(), real(1e-5), h_.data());
    kt.gemm_nn(1, d, d, h_.data(), d, L.wq.data().data(), d, q_.data(), d, false);
    kt.gemm_nn(1, d, d, h_.data(), d, L.wk.data().data(), d, k_.data(), d, false);
    kt.gemm_nn(1, d, d, h_.data(), d, L.wv.data().data(), d, v_.data(), d, false);
    rowops::rope(c.n_heads, dh, pos, c.rope_base, q_.data());
    rowops::rope(c.n_heads, dh, pos, c.rope_base, k_.data());
    real* keys = keys_[l].data();
    real* values = values_[l].data();
    std::copy(k_.begin(), k_.end(), keys + pos * d);
    std::copy(v_.begin(), v_.end(), values + pos * d);
    for (std::size_t hd = 0; hd < c.n_heads; ++hd) {
      rowops::attend(dh, q_.data() + hd * dh, keys + hd * dh, d, values + hd * dh, d, pos + 1, pos + 1,
                     scale, probs_.data(), attn_.data() + hd * dh);
    }
    kt.gemm_nn(1, d, d, attn_.data(), d, L.wo.data().data(), d, proj_.data(), d, false);
    for (std::size_t i = 0; i < d; ++i) x_[i] = x_[i] + proj_[i];

    rowops::rmsnorm(d, x_.data(), L.ffn_gain.data().data(), real(1e-5), h_.data());
    kt.gemm_nn(1, f, d, h_.data(), d, L.w1.data().data(), f, a_.data(), f, false);
    kt.gemm_nn(1, f, d, h_.data(), d, L.w3.data().data(), f, b_.data(), f, false);
    for (std::size_t i = 0; i < f; ++i) a_[i] = rowops::silu(a_[i]) * b_[i];
    kt.gemm_nn(1, d, f, a_.data(), f, L.w2.data().data(), d, proj_.data(), d, false);
    for (std::size_t i = 0; i < d; ++i) x_[i] = x_[i] + proj_[i];
  }
  rowops::rmsnorm(d, x_.data(), params_.final_gain.data().data(), real(1e-5), h_.data());
  kt.gemm_nn(1, c.d_voc, d, h_.data(), d, params_.output.data().data(), c.d_voc, logits_.data(), c.d_voc,
             false);
  ++length_;
  return logits_;
}

}  // namespace lmol

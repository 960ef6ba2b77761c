#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "lmol/model/params.hpp"
#include "lmol/numcore/tensor.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct ForwardOptions {
  bool training = false;              // enables dropout
  std::mt19937_64* rng = nullptr;     // required when training with dropout > 0
  // When set, receives one entry per layer holding the attention
  // probabilities laid out [segment][head][i][j].
  std::vector<std::vector<real>>* attention = nullptr;
};

// Packed forward pass. x holds the assembled rows of every sequence back to
// back; sequence s occupies rows [offsets[s], offsets[s+1]) and is rotated for
// positions 0..len-1. Returns logits [rows, d_voc]. Throws LengthError when a
// sequence exceeds config.max_total_len().
Tensor forward(const ModelParams& params, const Tensor& x, std::span<const std::size_t> offsets,
               const ForwardOptions& options = {});

// Single-sequence convenience wrapper.
Tensor forward(const ModelParams& params, const Tensor& x, const ForwardOptions& options = {});

// Incremental decoder with a per-layer key/value cache. Feeding rows one at a
// time yields logits bit-identical to the matching rows of forward().
class Decoder {
 public:
  explicit Decoder(const ModelParams& params);

  // Appends one embedded row (d_emb values) and returns the logits predicted
  // at that position. The span stays valid until the next call.
  std::span<const real> step(std::span<const real> row);
  std::size_t length() const noexcept { return length_; }
  void reset() noexcept { length_ = 0; }

 private:
  const ModelParams& params_;
  std::size_t length_ = 0;
  std::size_t capacity_;
  std::vector<std::vector<real>> keys_, values_;  // per layer, capacity x d_emb
  std::vector<real> x_, h_, q_, k_, v_, attn_, proj_, a_, b_, probs_, logits_;
};

}  // namespace lmol

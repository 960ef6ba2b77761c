#pragma once

#include <cstddef>

#include "lmol/numcore/real.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct ModelConfig {
  std::size_t d_emb = 384;
  std::size_t n_heads = 8;
  std::size_t n_layers = 8;
  std::size_t d_ffn = 1024;
  std::size_t d_voc = 591;
  std::size_t max_seq_len = 256;  // SMILES tokens, excluding [CLS]/[SEP]
  real dropout = real(0.1);
  std::size_t n_numeric = 3;
  std::size_t fragment_cap = 50;
  real rope_base = real(10000);

  // Published architecture.
  static ModelConfig paper();
  // Small model that trains on one CPU core in minutes.
  static ModelConfig desk();

  std::size_t d_head() const noexcept { return d_emb / n_heads; }
  // Longest assembled sequence: every numeric row, a full fragment and a
  // framed SMILES string.
  std::size_t max_total_len() const noexcept { return n_numeric + fragment_cap + max_seq_len + 2; }

  // Throws ConfigError on inconsistent or non-positive fields.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

}  // namespace lmol

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lmol/context/context.hpp"
#include "lmol/model/params.hpp"
#include "lmol/smiles/vocab.hpp"

namespace lmol::testing {

inline ModelConfig tiny_config(std::size_t d_voc = 12) {
  ModelConfig c;
  c.d_emb = 16;
  c.n_heads = 2;
  c.n_layers = 2;
  c.d_ffn = 24;
  c.d_voc = d_voc;
  c.max_seq_len = 32;
  c.dropout = 0;
  c.n_numeric = 2;
  c.fragment_cap = 6;
  return c;
}

inline std::vector<std::string> condition_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("prop" + std::to_string(i));
  return names;
}

// Larger init scale than training uses so that attention and norms are far
// from their linear regime and gradient checks exercise every path.
inline ModelParams tiny_params(const ModelConfig& c, std::uint64_t seed, double scale = 0.3) {
  ModelParams p = init_params(c, condition_names(c.n_numeric), seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, scale);
  for (Tensor& t : p.tensors()) {
    for (real& v : t.mutable_data()) v += static_cast<real>(noise(rng));
  }
  return p;
}

// Framed random SMILES-region ids: [CLS], tokens from the non-reserved range, [SEP].
inline std::vector<int> random_framed(std::mt19937_64& rng, std::size_t tokens, std::size_t d_voc) {
  std::vector<int> ids{smiles::kClsId};
  for (std::size_t i = 0; i < tokens; ++i) {
    ids.push_back(static_cast<int>(smiles::kReservedCount + rng() % (d_voc - smiles::kReservedCount)));
  }
  ids.push_back(smiles::kSepId);
  return ids;
}

inline ContextSpec random_spec(std::mt19937_64& rng, const ModelConfig& c) {
  ContextSpec s;
  std::normal_distribution<double> value(1.0, 1.0);
  for (std::size_t p = 0; p < c.n_numeric; ++p) {
    if (rng() % 3 != 0) s.numeric.push_back({p, static_cast<real>(value(rng))});
  }
  if (rng() % 2 == 0) {
    FragmentCondition f;
    const std::size_t k = 1 + rng() % c.fragment_cap;
    for (std::size_t i = 0; i < k; ++i) {
      f.ids.push_back(static_cast<int>(smiles::kReservedCount + rng() % (c.d_voc - smiles::kReservedCount)));
    }
    s.fragment = f;
  }
  return s;
}

}  // namespace lmol::testing

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lmol/model/config.hpp"
#include "lmol/numcore/tensor.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct LayerParams {
  Tensor wq, wk, wv, wo;  // d_emb x d_emb; head h owns columns [h*d_head, (h+1)*d_head)
  Tensor w1, w3;          // d_emb x d_ffn
  Tensor w2;              // d_ffn x d_emb
  Tensor attn_gain, ffn_gain;
};

// Condition embeddings. Numeric property p maps value v to
// v * weight[p] + bias[p] + type[p]; fragment token t maps to
// token_table[t] + fragment_table[t] + fragment_label.
struct ConditionParams {
  std::vector<std::string> names;  // property id -> column name
  std::vector<Tensor> weight, bias, type;
  Tensor fragment_table;  // d_voc x d_emb
  Tensor fragment_label;  // d_emb
};

struct ModelParams {
  ModelConfig config;
  Tensor token_table;  // d_voc x d_emb
  std::vector<LayerParams> layers;
  Tensor final_gain;
  Tensor output;  // d_emb x d_voc, not tied to token_table
  ConditionParams conditions;

  // Stable order; names are what the checkpoint stores.
  std::vector<std::pair<std::string, Tensor>> named() const;
  std::vector<Tensor> tensors() const;
  std::size_t count() const;
};

// Normal(0, 0.02) matrices and embeddings, unit gains. `condition_names`
// must have config.n_numeric entries.
ModelParams init_params(const ModelConfig& config, std::vector<std::string> condition_names,
                        std::uint64_t seed);

// Number of scalars init_params would allocate.
std::size_t parameter_count(const ModelConfig& config);

}  // namespace lmol

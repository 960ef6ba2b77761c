#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "lmol/model/params.hpp"
#include "lmol/numcore/tensor.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct NumericCondition {
  std::size_t property_id = 0;
  real value = 0;
};

struct FragmentCondition {
  std::vector<int> ids;
};

// Conditions prepended to one sequence: numeric rows in increasing property
// id, then the fragment rows. Empty means unconditional.
struct ContextSpec {
  std::vector<NumericCondition> numeric;
  std::optional<FragmentCondition> fragment;

  std::size_t rows() const noexcept { return numeric.size() + (fragment ? fragment->ids.size() : 0); }
  bool empty() const noexcept { return rows() == 0; }
  // Throws ConfigError for unknown or unordered property ids, LengthError for
  // an empty or overlong fragment, IndexError for fragment ids outside the
  // vocabulary or reserved.
  void validate(const ModelConfig& config) const;
};

// value * weight[p] + bias[p] + type[p], shape [1, d_emb].
Tensor encode_numeric(const NumericCondition& c, const ModelParams& params);

// Row j = token_table[id_j] + fragment_table[id_j] + fragment_label, shape [k, d_emb].
Tensor encode_fragment(const FragmentCondition& f, const ModelParams& params);

// One sequence of a packed batch: context rows followed by the framed SMILES.
struct Sequence {
  const ContextSpec* context = nullptr;
  std::span<const int> smiles;  // [CLS] ... [SEP], or a generation prefix starting at [CLS]
};

struct AssembledInput {
  Tensor embedded;                   // [rows, d_emb], sequences back to back
  std::vector<std::size_t> offsets;  // sequence s spans [offsets[s], offsets[s+1])
  std::vector<std::size_t> positions;
  std::vector<int> targets;          // next-token id, kIgnoreTarget where not trained
  std::vector<bool> loss_mask;       // targets[i] != kIgnoreTarget
  std::size_t masked_count = 0;
};

inline constexpr int kIgnoreTarget = -1;

// Embeds every sequence and builds next-token targets. The mask covers rows
// from [CLS] up to the row before the last SMILES token; context rows never
// carry a target. Throws LengthError when a sequence exceeds the model limit.
AssembledInput assemble_input(std::span<const Sequence> sequences, const ModelParams& params);
AssembledInput assemble_input(const ContextSpec& spec, std::span<const int> smiles_ids,
                              const ModelParams& params);

// Which conditions a batch carries; SCL removes entries batch-wide.
struct ConditionTemplate {
  std::vector<bool> numeric;  // indexed by property id
  bool fragment = false;

  static ConditionTemplate all(std::size_t n_numeric, bool fragment = true);
  bool operator==(const ConditionTemplate&) const = default;
};

// One Bernoulli(p_del) draw per numeric condition and one for the fragment,
// always n + 1 draws so the stream position does not depend on the template.
// A condition already absent stays absent. Throws ConfigError for p_del
// outside [0, 1].
ConditionTemplate scl_apply(const ConditionTemplate& templ, real p_del, std::mt19937_64& rng);

// Contiguous span of the non-reserved tokens of `smiles_ids`: start uniform in
// [0, n), end uniform in (start, n], then capped at start + cap. Throws
// DataError when no non-reserved token exists.
FragmentCondition sample_fragment_span(std::span<const int> smiles_ids, std::mt19937_64& rng,
                                       std::size_t cap = 50);

}  // namespace lmol

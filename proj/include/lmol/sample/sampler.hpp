#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lmol/context/context.hpp"
#include "lmol/model/params.hpp"
#include "lmol/smiles/vocab.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct SamplerConfig {
  real temperature = real(0.8);  // 0 selects greedy decoding
  std::size_t max_new_tokens = 256;
  std::uint64_t seed = 0;

  // Throws ConfigError for a negative or non-finite temperature or a zero
  // token limit.
  void validate() const;
};

enum class StopReason { kSep, kLimit };
const char* stop_reason_name(StopReason r) noexcept;

struct Generation {
  std::string smiles;
  // Emitted ids without the final [SEP]. Reserved ids an undertrained model
  // may emit stay here but are dropped from `smiles`.
  std::vector<int> ids;
  StopReason stop = StopReason::kSep;
};

// softmax(logits / t) computed after subtracting the maximum logit; for t = 1
// this equals softmax_rows(logits) bit for bit. Requires t > 0.
std::vector<real> sampling_distribution(std::span<const real> logits, real temperature);

// Index of the first maximal logit.
std::size_t argmax(std::span<const real> logits);

// Greedy for t = 0, otherwise one categorical draw from
// sampling_distribution.
int choose_token(std::span<const real> logits, real temperature, std::mt19937_64& rng);

// Feeds the context rows and [CLS], then decodes until [SEP] or the token
// limit (also capped by the model's length limit).
Generation generate(const ModelParams& params, const smiles::Vocabulary& vocab, const ContextSpec& spec,
                    const SamplerConfig& config, std::mt19937_64& rng);

// n draws sharing one random stream seeded with config.seed, so the first
// result equals generate() with a fresh stream under the same seed.
std::vector<Generation> generate_batch(const ModelParams& params, const smiles::Vocabulary& vocab,
                                       const ContextSpec& spec, const SamplerConfig& config, std::size_t n);

// One draw per spec, same stream convention.
std::vector<Generation> generate_batch(const ModelParams& params, const smiles::Vocabulary& vocab,
                                       std::span<const ContextSpec> specs, const SamplerConfig& config);

}  // namespace lmol

#include "lmol/sample/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "lmol/error.hpp"
#include "lmol/model/transformer.hpp"
#include "lmol/numcore/ops.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

void SamplerConfig::validate() const {
  if (!(temperature >= 0) || !std::isfinite(static_cast<double>(temperature))) {
    throw ConfigError("temperature must be a finite non-negative number");
  }
  if (max_new_tokens == 0) throw ConfigError("max_new_tokens must be positive");
}

const char* stop_reason_name(StopReason r) noexcept { return r == StopReason::kSep ? "sep" : "limit"; }

std::vector<real> sampling_distribution(std::span<const real> logits, real temperature) {
  if (!(temperature > 0)) throw ConfigError("sampling distribution needs a positive temperature");
  if (logits.empty()) throw ShapeError("empty logits");
  const real mx = *std::max_element(logits.begin(), logits.end());
  std::vector<real> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = (logits[i] - mx) / temperature;
  const Tensor p = softmax_rows(Tensor::from({1, logits.size()}, std::move(scaled)));
  return {p.data().begin(), p.data().end()};
}

std::size_t argmax(std::span<const real> logits) {
  return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

int choose_token(std::span<const real> logits, real temperature, std::mt19937_64& rng) {
  if (temperature == 0) return static_cast<int>(argmax(logits));
  const std::vector<real> p = sampling_distribution(logits, temperature);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    cum += static_cast<double>(p[i]);
    last = i;
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(last);  // rounding left u just above the total
}

Generation generate(const ModelParams& params, const smiles::Vocabulary& vocab, const ContextSpec& spec,
                    const SamplerConfig& config, std::mt19937_64& rng) {
  config.validate();
  if (vocab.size() != params.config.d_voc) {
    throw ConfigError("vocabulary has " + std::to_string(vocab.size()) + " tokens but the model expects " +
                      std::to_string(params.config.d_voc));
  }
  const int cls = smiles::kClsId;
  const AssembledInput prefix = assemble_input(spec, std::span<const int>(&cls, 1), params);
  const std::size_t d = params.config.d_emb;
  Decoder decoder(params);
  std::span<const real> logits;
  for (std::size_t r = 0; r < prefix.embedded.dim(0); ++r) {
    logits = decoder.step(prefix.embedded.data().subspan(r * d, d));
  }
  // The final [SEP] must still fit in the model's window.
  const std::size_t room = params.config.max_total_len() - prefix.embedded.dim(0) - 1;
  const std::size_t limit = std::min(config.max_new_tokens, room);

  Generation g;
  g.stop = StopReason::kLimit;
  while (g.ids.size() < limit) {
    const int token = choose_token(logits, config.temperature, rng);
    if (token == smiles::kSepId) {
      g.stop = StopReason::kSep;
      break;
    }
    g.ids.push_back(token);
    logits = decoder.step(params.token_table.data().subspan(static_cast<std::size_t>(token) * d, d));
  }
  g.smiles = smiles::detokenize(g.ids, vocab);
  return g;
}

std::vector<Generation> generate_batch(const ModelParams& params, const smiles::Vocabulary& vocab,
                                       const ContextSpec& spec, const SamplerConfig& config, std::size_t n) {
  if (n == 0) throw ConfigError("sample count must be positive");
  return generate_batch(params, vocab, std::vector<ContextSpec>(n, spec), config);
}

std::vector<Generation> generate_batch(const ModelParams& params, const smiles::Vocabulary& vocab,
                                       std::span<const ContextSpec> specs, const SamplerConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::vector<Generation> out;
  out.reserve(specs.size());
  for (const ContextSpec& s : specs) out.push_back(generate(params, vocab, s, config, rng));
  return out;
}

}  // namespace lmol

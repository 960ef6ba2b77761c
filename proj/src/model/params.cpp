#include "lmol/model/params.hpp"

#include <random>

#include "lmol/error.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

ModelConfig ModelConfig::paper() { return ModelConfig{}; }

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.d_emb = 64;
  c.n_heads = 4;
  c.n_layers = 2;
  c.d_ffn = 256;
  return c;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(d_emb, "d_emb");
  positive(n_heads, "n_heads");
  positive(n_layers, "n_layers");
  positive(d_ffn, "d_ffn");
  positive(d_voc, "d_voc");
  positive(max_seq_len, "max_seq_len");
  positive(fragment_cap, "fragment_cap");
  if (d_emb % n_heads != 0) throw ConfigError("d_emb must be divisible by n_heads");
  if (d_head() % 2 != 0) throw ConfigError("head dimension must be even for rotary embeddings");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(rope_base > 1)) throw ConfigError("rope_base must exceed 1");
  if (d_voc < 5) throw ConfigError("d_voc must cover the reserved tokens plus one");
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("token_table", token_table);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "layer." + std::to_string(l) + ".";
    const LayerParams& L = layers[l];
    out.emplace_back(p + "wq", L.wq);
    out.emplace_back(p + "wk", L.wk);
    out.emplace_back(p + "wv", L.wv);
    out.emplace_back(p + "wo", L.wo);
    out.emplace_back(p + "w1", L.w1);
    out.emplace_back(p + "w2", L.w2);
    out.emplace_back(p + "w3", L.w3);
    out.emplace_back(p + "attn_gain", L.attn_gain);
    out.emplace_back(p + "ffn_gain", L.ffn_gain);
  }
  out.emplace_back("final_gain", final_gain);
  out.emplace_back("output", output);
  for (std::size_t i = 0; i < conditions.names.size(); ++i) {
    const std::string p = "cond." + std::to_string(i) + "." + conditions.names[i] + ".";
    out.emplace_back(p + "weight", conditions.weight[i]);
    out.emplace_back(p + "bias", conditions.bias[i]);
    out.emplace_back(p + "type", conditions.type[i]);
  }
  out.emplace_back("fragment_table", conditions.fragment_table);
  out.emplace_back("fragment_label", conditions.fragment_label);
  return out;
}

std::vector<Tensor> ModelParams::tensors() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (auto& [name, t] : named()) n += t.numel();
  return n;
}

ModelParams init_params(const ModelConfig& config, std::vector<std::string> condition_names,
                        std::uint64_t seed) {
  config.validate();
  if (condition_names.size() != config.n_numeric) {
    throw ConfigError("expected " + std::to_string(config.n_numeric) + " condition names, got " +
                      std::to_string(condition_names.size()));
  }
  for (const std::string& n : condition_names) {
    if (n.empty() || n.find_first_of(" \t\n,=") != std::string::npos) {
      throw ConfigError("invalid condition name '" + n + "'");
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  auto randn = [&](Shape shape) {
    std::vector<real> v(shape_numel(shape));
    for (real& x : v) x = static_cast<real>(normal(rng));
    return Tensor::parameter(std::move(shape), std::move(v));
  };
  auto ones = [](std::size_t n) { return Tensor::parameter({n}, std::vector<real>(n, real(1))); };
  auto zeros = [](std::size_t n) { return Tensor::parameter({n}, std::vector<real>(n, real(0))); };

  const std::size_t d = config.d_emb, f = config.d_ffn, v = config.d_voc;
  ModelParams p;
  p.config = config;
  p.token_table = randn({v, d});
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    LayerParams L;
    L.wq = randn({d, d});
    L.wk = randn({d, d});
    L.wv = randn({d, d});
    L.wo = randn({d, d});
    L.w1 = randn({d, f});
    L.w3 = randn({d, f});
    L.w2 = randn({f, d});
    L.attn_gain = ones(d);
    L.ffn_gain = ones(d);
    p.layers.push_back(std::move(L));
  }
  p.final_gain = ones(d);
  p.output = randn({d, v});
  p.conditions.names = std::move(condition_names);
  for (std::size_t i = 0; i < config.n_numeric; ++i) {
    p.conditions.weight.push_back(randn({d}));
    p.conditions.bias.push_back(zeros(d));
    p.conditions.type.push_back(randn({d}));
  }
  p.conditions.fragment_table = randn({v, d});
  p.conditions.fragment_label = randn({d});
  return p;
}

std::size_t parameter_count(const ModelConfig& c) {
  const std::size_t d = c.d_emb, f = c.d_ffn, v = c.d_voc;
  const std::size_t layer = 4 * d * d + 3 * d * f + 2 * d;
  return v * d + c.n_layers * layer + d + d * v + c.n_numeric * 3 * d + v * d + d;
}

}  // namespace lmol

#include "lmol/train/checkpoint.hpp"

#include <bit>
#include <map>

#include "binary_io.hpp"
#include "lmol/error.hpp"

namespace lmol::inline LMOL_PRECISION_NS {
namespace {

constexpr std::string_view kMagic = "LMOL";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kConfigFields = 10;

void put_tensor(binary::Writer& w, const std::string& name, const Shape& shape, std::span<const real> data) {
  w.string(name);
  w.u32(static_cast<std::uint32_t>(shape.size()));
  for (std::size_t d : shape) w.u32(static_cast<std::uint32_t>(d));
  for (real v : data) w.f32(static_cast<float>(v));
}

struct RawTensor {
  Shape shape;
  std::vector<float> data;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, std::uint64_t step,
                     std::uint64_t seed, const Adam* optimizer) {
  const ModelConfig& c = params.config;
  binary::Writer w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(kConfigFields);
  for (std::size_t v : {c.d_emb, c.n_heads, c.n_layers, c.d_ffn, c.d_voc, c.max_seq_len, c.n_numeric, c.fragment_cap}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(c.rope_base)));
  w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(c.dropout)));
  w.u64(step);
  w.u64(seed);
  w.u64(optimizer ? optimizer->steps() : 0);

  const auto named = params.named();
  if (optimizer && optimizer->params().size() != named.size()) {
    throw StateError("optimizer does not cover the model parameters");
  }
  w.u32(static_cast<std::uint32_t>(named.size() * (optimizer ? 3 : 1)));
  for (const auto& [name, t] : named) put_tensor(w, name, t.shape(), t.data());
  if (optimizer) {
    const Adam& adam = *optimizer;
    for (std::size_t i = 0; i < named.size(); ++i) {
      put_tensor(w, "adam.m/" + named[i].first, named[i].second.shape(), adam.first_moments()[i]);
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
      put_tensor(w, "adam.v/" + named[i].first, named[i].second.shape(), adam.second_moments()[i]);
    }
  }
  w.commit(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  binary::Reader r = binary::Reader::open(path, "checkpoint");
  if (r.bytes(4) != kMagic) r.fail("bad magic");
  if (const std::uint32_t v = r.u32(); v != kVersion) r.fail("unsupported version " + std::to_string(v));
  if (r.u32() != kConfigFields) r.fail("unexpected config field count");
  ModelConfig c;
  c.d_emb = r.u32();
  c.n_heads = r.u32();
  c.n_layers = r.u32();
  c.d_ffn = r.u32();
  c.d_voc = r.u32();
  c.max_seq_len = r.u32();
  c.n_numeric = r.u32();
  c.fragment_cap = r.u32();
  c.rope_base = static_cast<real>(std::bit_cast<float>(r.u32()));
  c.dropout = static_cast<real>(std::bit_cast<float>(r.u32()));
  try {
    c.validate();
  } catch (const ConfigError& e) {
    r.fail(std::string("stored config is invalid: ") + e.what());
  }
  if (expected) {
    ModelConfig want = *expected;
    // Dropout only matters for training and may be overridden.
    want.dropout = c.dropout;
    if (!(want == c)) {
      throw ShapeError("checkpoint config (d_emb " + std::to_string(c.d_emb) + ", layers " +
                       std::to_string(c.n_layers) + ", d_voc " + std::to_string(c.d_voc) +
                       ") does not match the requested model (d_emb " + std::to_string(want.d_emb) + ", layers " +
                       std::to_string(want.n_layers) + ", d_voc " + std::to_string(want.d_voc) + ")");
    }
  }
  Checkpoint ck;
  ck.step = r.u64();
  ck.seed = r.u64();
  const std::uint64_t adam_steps = r.u64();

  const std::uint32_t n_tensors = r.u32();
  std::map<std::string, RawTensor> tensors;
  std::vector<std::string> order;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.string();
    RawTensor t;
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 4) r.fail("tensor " + name + " has unsupported rank");
    for (std::uint32_t k = 0; k < rank; ++k) t.shape.push_back(r.u32());
    const std::size_t n = shape_numel(t.shape);
    if (n > r.remaining() / sizeof(float)) r.fail("truncated file");
    t.data.resize(n);
    r.floats(t.data.data(), n);
    if (!tensors.emplace(name, std::move(t)).second) r.fail("duplicate tensor " + name);
    order.push_back(std::move(name));
  }
  if (!r.at_end()) r.fail("trailing bytes");

  // Condition names are encoded as "cond.<i>.<name>.weight".
  std::vector<std::string> names(c.n_numeric);
  for (const std::string& n : order) {
    if (n.rfind("cond.", 0) != 0 || n.size() < 12 || n.substr(n.size() - 7) != ".weight") continue;
    const std::size_t dot = n.find('.', 5);
    const std::size_t idx = std::stoul(n.substr(5, dot - 5));
    if (idx >= names.size()) r.fail("condition index out of range in " + n);
    names[idx] = n.substr(dot + 1, n.size() - 7 - dot - 1);
  }
  for (const std::string& n : names) {
    if (n.empty()) r.fail("missing condition tensors");
  }

  ck.params = init_params(c, names, 0);
  auto fetch = [&](const std::string& name, const Shape& shape) -> const RawTensor& {
    const auto it = tensors.find(name);
    if (it == tensors.end()) r.fail("missing tensor " + name);
    if (it->second.shape != shape) {
      r.fail("tensor " + name + " has shape " + shape_string(it->second.shape) + ", expected " +
             shape_string(shape));
    }
    return it->second;
  };
  const auto named = ck.params.named();
  for (const auto& [name, t] : named) {
    const RawTensor& raw = fetch(name, t.shape());
    auto dst = Tensor(t).mutable_data();
    for (std::size_t i = 0; i < raw.data.size(); ++i) dst[i] = static_cast<real>(raw.data[i]);
  }
  if (tensors.contains("adam.m/" + named.front().first)) {
    OptimizerState st;
    st.steps = adam_steps;
    for (const char* kind : {"adam.m/", "adam.v/"}) {
      auto& dst = kind[5] == 'm' ? st.first : st.second;
      for (const auto& [name, t] : named) {
        const RawTensor& raw = fetch(kind + name, t.shape());
        dst.emplace_back(raw.data.begin(), raw.data.end());
      }
    }
    ck.optimizer = std::move(st);
  }
  if (tensors.size() != named.size() * (ck.optimizer ? 3 : 1)) r.fail("unexpected extra tensors");
  return ck;
}

void restore_optimizer(const OptimizerState& state, Adam& optimizer) {
  if (state.first.size() != optimizer.params().size() || state.second.size() != optimizer.params().size()) {
    throw StateError("optimizer state does not match the parameter list");
  }
  for (std::size_t i = 0; i < state.first.size(); ++i) {
    if (state.first[i].size() != optimizer.params()[i].numel()) throw StateError("optimizer moment size mismatch");
    optimizer.first_moments()[i] = state.first[i];
    optimizer.second_moments()[i] = state.second[i];
  }
  optimizer.set_steps(state.steps);
}

}  // namespace lmol

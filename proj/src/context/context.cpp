#include "lmol/context/context.hpp"

#include <algorithm>
#include <cmath>

#include "lmol/error.hpp"
#include "lmol/numcore/ops.hpp"
#include "lmol/smiles/vocab.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

void ContextSpec::validate(const ModelConfig& config) const {
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    if (numeric[i].property_id >= config.n_numeric) {
      throw ConfigError("unknown numeric condition id " + std::to_string(numeric[i].property_id));
    }
    if (i > 0 && numeric[i].property_id <= numeric[i - 1].property_id) {
      throw ConfigError("numeric conditions must have strictly increasing ids");
    }
    if (!std::isfinite(static_cast<double>(numeric[i].value))) throw ConfigError("numeric condition value is not finite");
  }
  if (fragment) {
    if (fragment->ids.empty()) throw LengthError("fragment condition is empty");
    if (fragment->ids.size() > config.fragment_cap) {
      throw LengthError("fragment of " + std::to_string(fragment->ids.size()) + " tokens exceeds cap " +
                        std::to_string(config.fragment_cap));
    }
    for (int id : fragment->ids) {
      if (id < static_cast<int>(smiles::kReservedCount) || id >= static_cast<int>(config.d_voc)) {
        throw IndexError("fragment token id " + std::to_string(id) + " is reserved or outside the vocabulary");
      }
    }
  }
}

Tensor encode_numeric(const NumericCondition& c, const ModelParams& params) {
  if (c.property_id >= params.conditions.weight.size()) {
    throw ConfigError("unknown numeric condition id " + std::to_string(c.property_id));
  }
  const std::size_t p = c.property_id;
  const Tensor value = Tensor::from({1}, {c.value});
  return add_row(add_row(outer(value, params.conditions.weight[p]), params.conditions.bias[p]),
                 params.conditions.type[p]);
}

Tensor encode_fragment(const FragmentCondition& f, const ModelParams& params) {
  ContextSpec spec;
  spec.fragment = f;
  spec.validate(params.config);
  std::vector<std::size_t> rows(f.ids.begin(), f.ids.end());
  return add_row(add(gather_rows(params.token_table, rows), gather_rows(params.conditions.fragment_table, rows)),
                 params.conditions.fragment_label);
}

AssembledInput assemble_input(std::span<const Sequence> sequences, const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  if (sequences.empty()) throw ShapeError("assemble_input: no sequences");
  const std::size_t n_props = params.conditions.weight.size();

  // Source rows are grouped by kind (one block per numeric property, then all
  // fragment rows, then all SMILES rows); `order` maps each output row to its
  // source row.
  std::vector<std::vector<real>> prop_values(n_props);
  std::vector<std::vector<std::size_t>> prop_dest(n_props);
  std::vector<std::size_t> frag_ids, frag_dest, smiles_ids, smiles_dest;

  AssembledInput out;
  out.offsets.push_back(0);
  std::size_t row = 0;
  for (const Sequence& seq : sequences) {
    static const ContextSpec kEmpty;
    const ContextSpec& spec = seq.context ? *seq.context : kEmpty;
    spec.validate(cfg);
    if (seq.smiles.empty()) throw LengthError("assemble_input: empty SMILES region");
    const std::size_t len = spec.rows() + seq.smiles.size();
    if (len > cfg.max_total_len()) {
      throw LengthError("assemble_input: sequence of " + std::to_string(len) + " rows exceeds limit " +
                        std::to_string(cfg.max_total_len()));
    }
    for (const NumericCondition& c : spec.numeric) {
      prop_values[c.property_id].push_back(c.value);
      prop_dest[c.property_id].push_back(row);
      out.targets.push_back(kIgnoreTarget);
      ++row;
    }
    if (spec.fragment) {
      for (int id : spec.fragment->ids) {
        frag_ids.push_back(static_cast<std::size_t>(id));
        frag_dest.push_back(row++);
        out.targets.push_back(kIgnoreTarget);
      }
    }
    for (std::size_t i = 0; i < seq.smiles.size(); ++i) {
      const int id = seq.smiles[i];
      if (id < 0 || id >= static_cast<int>(cfg.d_voc)) {
        throw IndexError("assemble_input: token id " + std::to_string(id) + " outside vocabulary");
      }
      smiles_ids.push_back(static_cast<std::size_t>(id));
      smiles_dest.push_back(row++);
      const bool has_next = i + 1 < seq.smiles.size() && seq.smiles[i + 1] != smiles::kPadId;
      out.targets.push_back(has_next && id != smiles::kPadId ? seq.smiles[i + 1] : kIgnoreTarget);
    }
    out.offsets.push_back(row);
    for (std::size_t i = 0; i < len; ++i) out.positions.push_back(i);
  }

  std::vector<Tensor> parts;
  std::vector<std::size_t> order(row);
  std::size_t source = 0;
  auto place = [&](const std::vector<std::size_t>& dest) {
    for (std::size_t dst : dest) order[dst] = source++;
  };
  for (std::size_t p = 0; p < n_props; ++p) {
    if (prop_values[p].empty()) continue;
    const std::size_t n = prop_values[p].size();
    const Tensor values = Tensor::from({n}, std::move(prop_values[p]));
    parts.push_back(add_row(add_row(outer(values, params.conditions.weight[p]), params.conditions.bias[p]),
                            params.conditions.type[p]));
    place(prop_dest[p]);
  }
  if (!frag_ids.empty()) {
    parts.push_back(add_row(add(gather_rows(params.token_table, frag_ids),
                                gather_rows(params.conditions.fragment_table, frag_ids)),
                            params.conditions.fragment_label));
    place(frag_dest);
  }
  parts.push_back(gather_rows(params.token_table, smiles_ids));
  place(smiles_dest);

  const Tensor stacked = parts.size() == 1 ? parts.front() : concat_rows(parts);
  out.embedded = gather_rows(stacked, order);
  out.loss_mask.resize(row);
  for (std::size_t i = 0; i < row; ++i) {
    out.loss_mask[i] = out.targets[i] != kIgnoreTarget;
    out.masked_count += out.loss_mask[i];
  }
  return out;
}

AssembledInput assemble_input(const ContextSpec& spec, std::span<const int> smiles_ids,
                              const ModelParams& params) {
  const Sequence seq{&spec, smiles_ids};
  return assemble_input(std::span<const Sequence>(&seq, 1), params);
}

ConditionTemplate ConditionTemplate::all(std::size_t n_numeric, bool fragment) {
  return ConditionTemplate{std::vector<bool>(n_numeric, true), fragment};
}

ConditionTemplate scl_apply(const ConditionTemplate& templ, real p_del, std::mt19937_64& rng) {
  if (!(p_del >= 0 && p_del <= 1)) throw ConfigError("p_del must lie in [0, 1]");
  std::bernoulli_distribution remove(static_cast<double>(p_del));
  ConditionTemplate out = templ;
  for (std::size_t i = 0; i < out.numeric.size(); ++i) {
    if (remove(rng)) out.numeric[i] = false;
  }
  if (remove(rng)) out.fragment = false;
  return out;
}

FragmentCondition sample_fragment_span(std::span<const int> smiles_ids, std::mt19937_64& rng,
                                       std::size_t cap) {
  if (cap == 0) throw ConfigError("fragment cap must be positive");
  std::vector<int> tokens;
  for (int id : smiles_ids) {
    if (!smiles::Vocabulary::is_reserved(id)) tokens.push_back(id);
  }
  if (tokens.empty()) throw DataError("cannot sample a fragment from an empty SMILES");
  const std::size_t n = tokens.size();
  const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::size_t end = std::uniform_int_distribution<std::size_t>(start + 1, n)(rng);
  end = std::min(end, start + cap);
  return FragmentCondition{{tokens.begin() + static_cast<std::ptrdiff_t>(start),
                            tokens.begin() + static_cast<std::ptrdiff_t>(end)}};
}

}  // namespace lmol

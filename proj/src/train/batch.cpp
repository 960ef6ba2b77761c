#include "lmol/train/batch.hpp"

#include <algorithm>
#include <numeric>

#include "lmol/error.hpp"
#include "lmol/smiles/vocab.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

std::vector<Sequence> Batch::sequences() const {
  std::vector<Sequence> out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = {&contexts[i], row(i).subspan(0, lengths[i])};
  return out;
}

Batch make_batch(std::span<const Example* const> rows, std::size_t n_numeric, const BatchOptions& options,
                 std::mt19937_64& rng) {
  if (rows.empty()) throw DataError("empty batch");
  Batch b;
  b.size = rows.size();
  for (const Example* e : rows) {
    if (e->ids.empty()) throw DataError("example '" + e->smiles + "' has no tokens");
    if (e->properties.size() < n_numeric) throw DataError("example '" + e->smiles + "' lacks condition values");
    b.max_len = std::max(b.max_len, e->ids.size() + 2);
  }
  b.tokens.assign(b.size * b.max_len, smiles::kPadId);
  b.loss_mask.assign(b.size * b.max_len, false);
  b.present = scl_apply(ConditionTemplate::all(n_numeric, options.use_fragments), options.p_del, rng);
  for (std::size_t i = 0; i < b.size; ++i) {
    const Example& e = *rows[i];
    int* row = b.tokens.data() + i * b.max_len;
    row[0] = smiles::kClsId;
    std::copy(e.ids.begin(), e.ids.end(), row + 1);
    row[e.ids.size() + 1] = smiles::kSepId;
    b.lengths.push_back(e.ids.size() + 2);
    for (std::size_t j = 0; j + 1 < b.lengths.back(); ++j) b.loss_mask[i * b.max_len + j] = true;

    ContextSpec spec;
    for (std::size_t p = 0; p < n_numeric; ++p) {
      if (b.present.numeric[p]) spec.numeric.push_back({p, e.properties[p]});
    }
    if (b.present.fragment) spec.fragment = sample_fragment_span(e.ids, rng, options.fragment_cap);
    b.contexts.push_back(std::move(spec));
  }
  return b;
}

std::vector<Batch> make_batches(std::span<const Example> rows, std::size_t batch_size, std::size_t n_numeric,
                                const BatchOptions& options, std::mt19937_64& rng) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<const Example*> order(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) order[i] = &rows[i];
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    out.push_back(make_batch(std::span<const Example* const>(order.data() + start, n), n_numeric, options, rng));
  }
  return out;
}

}  // namespace lmol

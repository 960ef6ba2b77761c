#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "lmol/context/context.hpp"
#include "lmol/train/dataset.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct BatchOptions {
  real p_del = real(0.15);
  bool use_fragments = true;  // condition on a random span of each molecule
  std::size_t fragment_cap = 50;
};

// Padded token matrix plus per-sample contexts. Every row is framed
// [CLS] ... [SEP] and padded with [PAD] to max_len, the longest row.
struct Batch {
  std::size_t size = 0;
  std::size_t max_len = 0;
  std::vector<int> tokens;             // size x max_len
  std::vector<std::size_t> lengths;    // framed length per row
  std::vector<bool> loss_mask;         // size x max_len; true where the next token is a real SMILES token
  ConditionTemplate present;           // conditions that survived SCL, shared by every row
  std::vector<ContextSpec> contexts;   // per row

  std::span<const int> row(std::size_t i) const { return {tokens.data() + i * max_len, max_len}; }
  // Packed model input; padding is dropped because it can never influence
  // earlier positions.
  std::vector<Sequence> sequences() const;
};

// Draws one SCL template for the whole batch, then a fragment span per row.
Batch make_batch(std::span<const Example* const> rows, std::size_t n_numeric, const BatchOptions& options,
                 std::mt19937_64& rng);

// One epoch: shuffles, then cuts consecutive batches of `batch_size` (the
// last may be smaller).
std::vector<Batch> make_batches(std::span<const Example> rows, std::size_t batch_size, std::size_t n_numeric,
                                const BatchOptions& options, std::mt19937_64& rng);

}  // namespace lmol

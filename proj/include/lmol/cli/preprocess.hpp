#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include "lmol/cli/csv.hpp"
#include "lmol/smiles/vocab.hpp"
#include "lmol/train/dataset.hpp"

namespace lmol::cli {

// Built-in descriptor columns added to every dataset.
inline const char* const kDescriptorColumns[] = {"mol_weight_scaled", "heavy_atom_count", "ring_count"};

struct PreprocessOptions {
  std::size_t max_tokens = 256;
  std::optional<smiles::Vocabulary> vocab;  // built from the survivors when absent
};

struct PreprocessStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> rejected;  // reason -> count: salt, invalid, length, property

  std::size_t rejected_total() const;
};

struct PreprocessResult {
  Dataset dataset;
  smiles::Vocabulary vocab;
  PreprocessStats stats;
};

// Filters and tokenizes the rows of a table with a `smiles` column. Every other
// column is a numeric property; descriptor columns missing from the table, or
// empty in a row, are computed. Rows are rejected for a '.' (salt), a failed
// parse or valence check, more than max_tokens tokens, or a non-numeric
// property. Throws DataError without a smiles column or without survivors.
PreprocessResult preprocess(const CsvTable& table, const PreprocessOptions& options = {});

// Survivors as CSV with the dataset's columns, suitable as preprocess input.
std::string survivors_csv(const Dataset& dataset);

}  // namespace lmol::cli

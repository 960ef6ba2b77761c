#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lmol/numcore/real.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

// One tokenized molecule; ids exclude [CLS]/[SEP].
struct Example {
  std::string smiles;
  std::vector<int> ids;
  std::vector<real> properties;  // aligned with Dataset::property_names
};

struct Dataset {
  std::vector<std::string> property_names;
  std::vector<Example> rows;
};

// Little-endian binary file: "LMDS", u32 version, u32 property count, names,
// u64 row count, then per row the SMILES text, token ids and property values.
void save_dataset(const Dataset& data, const std::filesystem::path& path);
// Throws IoError when unreadable and FormatError when malformed.
Dataset load_dataset(const std::filesystem::path& path);

// Deterministic shuffle under `seed`, then the first round(ratio * n) rows
// (at least one, at most n - 1) form the training part. Throws DataError for
// fewer than two rows.
std::pair<std::vector<Example>, std::vector<Example>> split_dataset(std::vector<Example> rows,
                                                                    double ratio, std::uint64_t seed);

}  // namespace lmol

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "lmol/smiles/molgraph.hpp"

namespace lmol::smiles {

struct Verdict {
  bool valid = false;
  std::string reason;  // empty when valid

  explicit operator bool() const noexcept { return valid; }
};

// Valence and aromaticity checks on an already parsed graph.
Verdict check(const MolGraph& g);

// Parses and checks; never throws for malformed input.
Verdict validate(std::string_view text);

// Parsed graph when `text` is valid, nothing otherwise.
std::optional<MolGraph> parse_valid(std::string_view text);

}  // namespace lmol::smiles

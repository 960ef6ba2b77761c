#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace lmol::smiles {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  double weight;
  // Allowed total valences; empty means unrestricted.
  std::span<const int> valences;
};

// Atomic number 0 is the '*' wildcard atom: weight 0, unrestricted valence.
const ElementInfo& element(int atomic_number);
std::optional<int> atomic_number(std::string_view symbol);

inline constexpr double kHydrogenWeight = 1.008;

}  // namespace lmol::smiles

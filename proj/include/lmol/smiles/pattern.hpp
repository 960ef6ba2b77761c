#pragma once

#include <cstddef>
#include <vector>

#include "lmol/smiles/molgraph.hpp"

namespace lmol::smiles {

// Connectivity-only query graph: nodes carry atomic numbers (aromatic and
// aliphatic spellings coincide), edges carry no order.
struct Pattern {
  std::vector<int> labels;
  std::vector<std::vector<int>> neighbors;  // sorted

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t edge_count() const noexcept;
  bool adjacent(int a, int b) const;
  bool operator==(const Pattern&) const = default;
};

Pattern to_pattern(const MolGraph& g);

// True iff an injective, label-preserving map from pattern nodes to graph
// atoms sends every pattern edge to a graph bond. Throws ShapeError for an
// empty pattern.
bool substructure_match(const Pattern& p, const MolGraph& g);
bool substructure_match(const Pattern& p, const Pattern& target);

// Exhaustive enumeration of injective maps; test oracle for small graphs.
// Throws LengthError above `kBruteForceLimit` target atoms.
inline constexpr std::size_t kBruteForceLimit = 10;
bool brute_force_match(const Pattern& p, const MolGraph& g);
bool brute_force_match(const Pattern& p, const Pattern& target);

// Same node count, same edge count and each embeds into the other.
bool equivalent(const Pattern& a, const Pattern& b);

}  // namespace lmol::smiles

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lmol::smiles {

enum class BondOrder { kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

struct Atom {
  int atomic_number = 0;  // 0 for the '*' wildcard
  bool aromatic = false;
  int charge = 0;
  int explicit_h = 0;  // H count written inside brackets
  int implicit_h = 0;  // assigned by valence rules for organic-subset atoms
  int isotope = 0;     // 0 when unspecified
  bool bracket = false;

  int total_h() const noexcept { return explicit_h + implicit_h; }
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;
};

class MolGraph {
 public:
  MolGraph() = default;
  explicit MolGraph(std::string source) : source_(std::move(source)) {}

  int add_atom(const Atom& atom);
  // Throws ParseError for self-loops, duplicate bonds or bad indices.
  void add_bond(int a, int b, BondOrder order, std::size_t position = 0);

  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::size_t bond_count() const noexcept { return bonds_.size(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::vector<Atom>& atoms() noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  std::vector<Bond>& bonds() noexcept { return bonds_; }
  const Atom& atom(std::size_t i) const { return atoms_.at(i); }
  const std::string& source() const noexcept { return source_; }

  // Neighbour lists as (atom, bond index) pairs.
  std::vector<std::vector<std::pair<int, int>>> adjacency() const;
  int bond_between(int a, int b) const;  // -1 when absent
  std::size_t component_count() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::string source_;
};

// Parses SMILES text into a graph. Stereo markers are accepted and ignored.
// Throws ParseError carrying the offending character offset.
MolGraph parse(std::string_view text);

// Smallest allowed valence of the atom that is >= `used`, after shifting the
// element by its formal charge. Returns -1 when `used` exceeds every allowed
// valence and `used` itself when the element is unrestricted.
int target_valence(const Atom& atom, int used);
// Largest allowed valence after the charge shift, or -1 when unrestricted.
int max_valence(const Atom& atom);

}  // namespace lmol::smiles

#include "lmol/smiles/descriptors.hpp"

#include "lmol/smiles/elements.hpp"

namespace lmol::smiles {

double molecular_weight(const MolGraph& g) {
  double w = 0.0;
  for (const Atom& a : g.atoms()) w += element(a.atomic_number).weight + a.total_h() * kHydrogenWeight;
  return w;
}

Descriptors descriptors(const MolGraph& g) {
  Descriptors d;
  d.mol_weight_scaled = molecular_weight(g) / 100.0;
  for (const Atom& a : g.atoms()) d.heavy_atom_count += a.atomic_number > 1;
  d.ring_count = g.bond_count() + g.component_count() - g.atom_count();
  return d;
}

}  // namespace lmol::smiles

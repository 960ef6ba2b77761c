#pragma once

#include <cstddef>

#include "lmol/smiles/molgraph.hpp"

namespace lmol::smiles {

// Sum of standard atomic weights, implicit and bracket hydrogens included.
// Isotope labels do not change the weight.
double molecular_weight(const MolGraph& g);

struct Descriptors {
  double mol_weight_scaled = 0.0;  // molecular weight / 100
  std::size_t heavy_atom_count = 0;
  std::size_t ring_count = 0;
};

Descriptors descriptors(const MolGraph& g);

}  // namespace lmol::smiles

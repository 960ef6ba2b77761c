#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lmol::synth {

// Drug-like-looking SMILES built by chaining divalent units (chains, ethers,
// amides, para-linked aromatic rings) between two end caps. Molecular weight
// roughly follows a uniform target drawn from [min_weight, max_weight], so the
// scaled weight spans the range a conditioning experiment needs.
struct CorpusOptions {
  std::size_t count = 10000;
  std::uint64_t seed = 0;
  double min_weight = 50.0;
  double max_weight = 360.0;
  std::size_t max_tokens = 256;
};

// Distinct, valid, salt-free strings in generation order. Throws DataError if
// the requested count cannot be reached.
std::vector<std::string> make_corpus(const CorpusOptions& options);

}  // namespace lmol::synth

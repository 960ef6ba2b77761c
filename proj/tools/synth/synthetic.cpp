#include "synthetic.hpp"

#include <random>
#include <unordered_set>

#include "lmol/error.hpp"
#include "lmol/smiles/descriptors.hpp"
#include "lmol/smiles/validate.hpp"
#include "lmol/smiles/vocab.hpp"

namespace lmol::synth {
namespace {

struct Unit {
  const char* text;
  double weight;  // approximate contribution, hydrogens included
  bool hetero_ends;  // starts or ends with O/N/S
  bool oxygen = false;
};

// Divalent links; the next unit bonds to the last atom written.
constexpr Unit kLinks[] = {
    {"C", 14.0, false},          {"CC", 28.1, false},           {"CCC", 42.1, false},
    {"C(C)", 28.1, false},       {"C(C)C", 42.1, false},        {"C(O)", 30.0, false, true},
    {"C(F)", 32.0, false},       {"C(=O)", 28.0, false, true},        {"O", 16.0, true, true},
    {"N", 15.0, true},           {"N(C)", 29.0, true},          {"C(=O)N", 43.0, false, true},
    {"C(=O)O", 44.0, true, true},      {"S", 32.1, true},             {"c1ccc(cc1)", 76.1, false},
    {"c1ccc(s1)", 82.1, false},  {"c1ccc(nc1)", 77.1, false},   {"C1CCC(CC1)", 82.1, false},
    {"c1ccc(Cl)c(c1)", 110.5, false}, {"C=C", 26.0, false},     {"CCO", 44.1, true, true},
    {"C#C", 24.0, false},        {"c1cc(F)ccc1", 94.1, false},
};

constexpr Unit kCaps[] = {
    {"C", 15.0, false},         {"CC", 29.1, false},       {"O", 17.0, true, true},
    {"N", 16.0, true},          {"F", 19.0, false},        {"Cl", 35.5, false},
    {"Br", 79.9, false},        {"C(=O)O", 45.0, false, true},   {"C#N", 26.0, false},
    {"c1ccccc1", 77.1, false},  {"C(F)(F)F", 69.0, false}, {"OC", 31.0, true, true},
    {"C(N)=O", 44.0, false, true},    {"c1ccncc1", 78.1, false}, {"CCO", 45.1, true, true},
    {"C1CC1", 41.1, false},     {"c1ccsc1", 83.1, false},
};

// Only a quarter of the molecules may carry oxygen, which keeps common
// oxygen motifs such as C-C-O rare enough to measure fragment conditioning.
constexpr double kOxygenShare = 0.25;

template <std::size_t N>
const Unit& pick(const Unit (&units)[N], bool oxygen, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> any(0, N - 1);
  for (;;) {
    const Unit& u = units[any(rng)];
    if (oxygen || !u.oxygen) return u;
  }
}

std::string build(std::mt19937_64& rng, double target) {
  const bool oxygen = std::bernoulli_distribution(kOxygenShare)(rng);
  const Unit& head = pick(kCaps, oxygen, rng);
  std::string s = head.text;
  double weight = head.weight;
  bool hetero = head.hetero_ends;
  const double tail_budget = 20.0;
  while (weight + tail_budget < target) {
    const Unit& u = pick(kLinks, oxygen, rng);
    if (hetero && u.hetero_ends) continue;  // avoid O-O, N-N style joins
    s += u.text;
    weight += u.weight;
    hetero = u.hetero_ends;
  }
  for (int tries = 0; tries < 16; ++tries) {
    const Unit& cap = pick(kCaps, oxygen, rng);
    if (hetero && cap.hetero_ends) continue;
    s += cap.text;
    break;
  }
  return s;
}

}  // namespace

std::vector<std::string> make_corpus(const CorpusOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> target(options.min_weight, options.max_weight);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  const std::size_t max_attempts = options.count * 50 + 1000;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < options.count; ++attempt) {
    std::string s = build(rng, target(rng));
    if (seen.contains(s)) continue;
    const auto g = smiles::parse_valid(s);
    if (!g) continue;
    const double mw = smiles::molecular_weight(*g);
    if (mw < options.min_weight * 0.8 || mw > options.max_weight * 1.1) continue;
    if (smiles::split_tokens(s).size() > options.max_tokens) continue;
    seen.insert(s);
    out.push_back(std::move(s));
  }
  if (out.size() < options.count) {
    throw DataError("synthetic corpus reached only " + std::to_string(out.size()) + " of " +
                    std::to_string(options.count) + " molecules");
  }
  return out;
}

}  // namespace lmol::synth

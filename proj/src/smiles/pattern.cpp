#include "lmol/smiles/pattern.hpp"

#include <algorithm>
#include <numeric>

#include "lmol/error.hpp"

namespace lmol::smiles {

std::size_t Pattern::edge_count() const noexcept {
  std::size_t twice = 0;
  for (const auto& n : neighbors) twice += n.size();
  return twice / 2;
}

bool Pattern::adjacent(int a, int b) const {
  const auto& n = neighbors[static_cast<std::size_t>(a)];
  return std::binary_search(n.begin(), n.end(), b);
}

Pattern to_pattern(const MolGraph& g) {
  Pattern p;
  p.labels.reserve(g.atom_count());
  for (const Atom& a : g.atoms()) p.labels.push_back(a.atomic_number);
  p.neighbors.resize(g.atom_count());
  for (const Bond& b : g.bonds()) {
    p.neighbors[static_cast<std::size_t>(b.a)].push_back(b.b);
    p.neighbors[static_cast<std::size_t>(b.b)].push_back(b.a);
  }
  for (auto& n : p.neighbors) std::sort(n.begin(), n.end());
  return p;
}

namespace {

class Matcher {
 public:
  Matcher(const Pattern& p, const Pattern& t) : p_(p), t_(t), map_(p.size(), -1), used_(t.size(), false) {
    // Breadth-first order from the most constrained node keeps every newly
    // placed node adjacent to an already placed one whenever possible.
    std::vector<bool> seen(p.size(), false);
    while (order_.size() < p.size()) {
      int start = -1;
      for (std::size_t v = 0; v < p.size(); ++v) {
        if (!seen[v] && (start < 0 || p.neighbors[v].size() > p.neighbors[static_cast<std::size_t>(start)].size())) {
          start = static_cast<int>(v);
        }
      }
      seen[static_cast<std::size_t>(start)] = true;
      std::size_t head = order_.size();
      order_.push_back(start);
      for (; head < order_.size(); ++head) {
        for (int w : p.neighbors[static_cast<std::size_t>(order_[head])]) {
          if (!seen[static_cast<std::size_t>(w)]) {
            seen[static_cast<std::size_t>(w)] = true;
            order_.push_back(w);
          }
        }
      }
    }
    anchor_.assign(p.size(), -1);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (p.adjacent(order_[i], order_[j])) {
          anchor_[i] = order_[j];
          break;
        }
      }
    }
  }

  bool run() { return extend(0); }

 private:
  bool feasible(int pv, int tv) const {
    const auto pi = static_cast<std::size_t>(pv), ti = static_cast<std::size_t>(tv);
    if (used_[ti] || p_.labels[pi] != t_.labels[ti]) return false;
    if (p_.neighbors[pi].size() > t_.neighbors[ti].size()) return false;
    for (int w : p_.neighbors[pi]) {
      const int mapped = map_[static_cast<std::size_t>(w)];
      if (mapped >= 0 && !t_.adjacent(tv, mapped)) return false;
    }
    return true;
  }

  bool try_node(std::size_t depth, int pv, int tv) {
    if (!feasible(pv, tv)) return false;
    map_[static_cast<std::size_t>(pv)] = tv;
    used_[static_cast<std::size_t>(tv)] = true;
    if (extend(depth + 1)) return true;
    map_[static_cast<std::size_t>(pv)] = -1;
    used_[static_cast<std::size_t>(tv)] = false;
    return false;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const int pv = order_[depth];
    const int anchor = anchor_[depth];
    if (anchor >= 0) {
      // Candidates are restricted to neighbours of the anchor's image.
      for (int tv : t_.neighbors[static_cast<std::size_t>(map_[static_cast<std::size_t>(anchor)])]) {
        if (try_node(depth, pv, tv)) return true;
      }
      return false;
    }
    for (std::size_t tv = 0; tv < t_.size(); ++tv) {
      if (try_node(depth, pv, static_cast<int>(tv))) return true;
    }
    return false;
  }

  const Pattern& p_;
  const Pattern& t_;
  std::vector<int> order_;
  std::vector<int> anchor_;
  std::vector<int> map_;
  std::vector<bool> used_;
};

bool embeds_exhaustively(const Pattern& p, const Pattern& t, std::vector<int>& map, std::vector<bool>& used,
                         std::size_t next) {
  if (next == p.size()) {
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (p.labels[a] != t.labels[static_cast<std::size_t>(map[a])]) return false;
      for (int b : p.neighbors[a]) {
        if (!t.adjacent(map[a], map[static_cast<std::size_t>(b)])) return false;
      }
    }
    return true;
  }
  for (std::size_t tv = 0; tv < t.size(); ++tv) {
    if (used[tv]) continue;
    used[tv] = true;
    map[next] = static_cast<int>(tv);
    const bool ok = embeds_exhaustively(p, t, map, used, next + 1);
    used[tv] = false;
    if (ok) return true;
  }
  return false;
}

}  // namespace

bool substructure_match(const Pattern& p, const Pattern& target) {
  if (p.size() == 0) throw ShapeError("empty pattern");
  if (p.size() > target.size() || p.edge_count() > target.edge_count()) return false;
  return Matcher(p, target).run();
}

bool substructure_match(const Pattern& p, const MolGraph& g) { return substructure_match(p, to_pattern(g)); }

bool brute_force_match(const Pattern& p, const Pattern& target) {
  if (p.size() == 0) throw ShapeError("empty pattern");
  if (target.size() > kBruteForceLimit) {
    throw LengthError("brute-force matching is limited to " + std::to_string(kBruteForceLimit) + " atoms");
  }
  if (p.size() > target.size()) return false;
  std::vector<int> map(p.size(), -1);
  std::vector<bool> used(target.size(), false);
  return embeds_exhaustively(p, target, map, used, 0);
}

bool brute_force_match(const Pattern& p, const MolGraph& g) { return brute_force_match(p, to_pattern(g)); }

bool equivalent(const Pattern& a, const Pattern& b) {
  return a.size() == b.size() && a.edge_count() == b.edge_count() && substructure_match(a, b) &&
         substructure_match(b, a);
}

}  // namespace lmol::smiles

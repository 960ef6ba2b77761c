#include "lmol/smiles/validate.hpp"

#include <deque>
#include <functional>

#include "lmol/error.hpp"
#include "lmol/smiles/elements.hpp"

namespace lmol::smiles {
namespace {

using Adjacency = std::vector<std::vector<std::pair<int, int>>>;

std::vector<bool> find_bridges(const MolGraph& g, const Adjacency& adj) {
  const std::size_t n = g.atom_count();
  std::vector<bool> bridge(g.bond_count(), false);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  // Iterative Tarjan: frames hold (atom, bond used to enter, next neighbour).
  struct Frame {
    int v, via;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{static_cast<int>(root), -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nbrs = adj[static_cast<std::size_t>(f.v)];
      if (f.next < nbrs.size()) {
        const auto [w, bond] = nbrs[f.next++];
        if (bond == f.via) continue;
        const auto wi = static_cast<std::size_t>(w);
        if (disc[wi] < 0) {
          disc[wi] = low[wi] = timer++;
          stack.push_back({w, bond, 0});
        } else {
          low[static_cast<std::size_t>(f.v)] = std::min(low[static_cast<std::size_t>(f.v)], disc[wi]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const auto p = static_cast<std::size_t>(stack.back().v);
          low[p] = std::min(low[p], low[static_cast<std::size_t>(done.v)]);
          if (low[static_cast<std::size_t>(done.v)] > disc[p]) bridge[static_cast<std::size_t>(done.via)] = true;
        }
      }
    }
  }
  return bridge;
}

// Length of the shortest cycle through `bond` using only bonds in `allowed`.
int shortest_cycle_through(const MolGraph& g, const Adjacency& adj, const std::vector<bool>& allowed,
                           int bond) {
  const Bond& b = g.bonds()[static_cast<std::size_t>(bond)];
  std::vector<int> dist(g.atom_count(), -1);
  std::deque<int> queue{b.a};
  dist[static_cast<std::size_t>(b.a)] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const auto& [w, e] : adj[static_cast<std::size_t>(v)]) {
      if (e == bond || !allowed[static_cast<std::size_t>(e)] || dist[static_cast<std::size_t>(w)] >= 0) continue;
      dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
      if (w == b.b) return dist[static_cast<std::size_t>(w)] + 1;
      queue.push_back(w);
    }
  }
  return -1;
}

// Perfect matching over the pi-requiring atoms, always extending the atom with
// the fewest free partners.
bool perfect_matching(const std::vector<std::vector<int>>& partners, std::vector<int>& mate) {
  int best = -1;
  std::size_t best_free = SIZE_MAX;
  for (std::size_t v = 0; v < partners.size(); ++v) {
    if (mate[v] != -1) continue;
    std::size_t free = 0;
    for (int w : partners[v]) free += mate[static_cast<std::size_t>(w)] == -1;
    if (free < best_free) {
      best_free = free;
      best = static_cast<int>(v);
    }
  }
  if (best < 0) return true;
  if (best_free == 0) return false;
  const auto bv = static_cast<std::size_t>(best);
  for (int w : partners[bv]) {
    if (mate[static_cast<std::size_t>(w)] != -1) continue;
    mate[bv] = w;
    mate[static_cast<std::size_t>(w)] = best;
    if (perfect_matching(partners, mate)) return true;
    mate[bv] = mate[static_cast<std::size_t>(w)] = -1;
  }
  return false;
}

Verdict invalid(std::string reason) { return {false, std::move(reason)}; }

std::string describe(const MolGraph& g, std::size_t i) {
  const Atom& a = g.atom(i);
  return "atom " + std::to_string(i) + " (" + std::string(element(a.atomic_number).symbol) + ")";
}

}  // namespace

Verdict check(const MolGraph& g) {
  const std::size_t n = g.atom_count();
  const Adjacency adj = g.adjacency();
  const std::vector<bool> bridge = find_bridges(g, adj);

  std::vector<bool> ring_aromatic(g.bond_count(), false);
  std::vector<int> used(n, 0);
  for (std::size_t i = 0; i < g.bond_count(); ++i) {
    const Bond& b = g.bonds()[i];
    const int units = b.order == BondOrder::kAromatic ? 1 : static_cast<int>(b.order);
    used[static_cast<std::size_t>(b.a)] += units;
    used[static_cast<std::size_t>(b.b)] += units;
    ring_aromatic[i] = b.order == BondOrder::kAromatic && !bridge[i];
  }

  std::vector<int> pi_index(n, -1);
  std::size_t pi_atoms = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = g.atom(i);
    const int total = used[i] + a.total_h();
    if (a.aromatic) {
      int longest = -1;
      for (const auto& [w, e] : adj[i]) {
        if (ring_aromatic[static_cast<std::size_t>(e)]) {
          longest = std::max(longest, shortest_cycle_through(g, adj, ring_aromatic, e));
        }
      }
      if (longest < 0) return invalid(describe(g, i) + " is aromatic but not in an aromatic ring");
      if (longest < 5) return invalid(describe(g, i) + " is aromatic only in a ring smaller than five");
      const int v = target_valence(a, total);
      if (v < 0) return invalid(describe(g, i) + " exceeds its allowed valence");
      if (v - total >= 1 && max_valence(a) >= 0) pi_index[i] = static_cast<int>(pi_atoms++);
    } else {
      const int cap = max_valence(a);
      if (cap >= 0 && total > cap) {
        return invalid(describe(g, i) + " has valence " + std::to_string(total) + " > " + std::to_string(cap));
      }
    }
  }

  std::vector<std::vector<int>> partners(pi_atoms);
  for (std::size_t i = 0; i < g.bond_count(); ++i) {
    if (!ring_aromatic[i]) continue;
    const Bond& b = g.bonds()[i];
    const int pa = pi_index[static_cast<std::size_t>(b.a)], pb = pi_index[static_cast<std::size_t>(b.b)];
    if (pa < 0 || pb < 0) continue;
    partners[static_cast<std::size_t>(pa)].push_back(pb);
    partners[static_cast<std::size_t>(pb)].push_back(pa);
  }
  std::vector<int> mate(pi_atoms, -1);
  if (!perfect_matching(partners, mate)) return invalid("aromatic system has no Kekule structure");
  return {true, {}};
}

Verdict validate(std::string_view text) {
  try {
    return check(parse(text));
  } catch (const ParseError& e) {
    return invalid(std::string("parse error: ") + e.what());
  }
}

std::optional<MolGraph> parse_valid(std::string_view text) {
  try {
    MolGraph g = parse(text);
    if (check(g)) return g;
  } catch (const ParseError&) {
  }
  return std::nullopt;
}

}  // namespace lmol::smiles

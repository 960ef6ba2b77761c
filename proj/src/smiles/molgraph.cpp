#include "lmol/smiles/molgraph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

#include "lmol/error.hpp"
#include "lmol/smiles/elements.hpp"

namespace lmol::smiles {

int MolGraph::add_atom(const Atom& atom) {
  atoms_.push_back(atom);
  return static_cast<int>(atoms_.size() - 1);
}

void MolGraph::add_bond(int a, int b, BondOrder order, std::size_t position) {
  const int n = static_cast<int>(atoms_.size());
  if (a < 0 || b < 0 || a >= n || b >= n) throw ParseError("bond endpoint out of range", position);
  if (a == b) throw ParseError("atom bonded to itself", position);
  if (bond_between(a, b) >= 0) throw ParseError("duplicate bond", position);
  bonds_.push_back({a, b, order});
}

std::vector<std::vector<std::pair<int, int>>> MolGraph::adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> adj(atoms_.size());
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const Bond& b = bonds_[i];
    adj[static_cast<std::size_t>(b.a)].emplace_back(b.b, static_cast<int>(i));
    adj[static_cast<std::size_t>(b.b)].emplace_back(b.a, static_cast<int>(i));
  }
  return adj;
}

int MolGraph::bond_between(int a, int b) const {
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const Bond& bd = bonds_[i];
    if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) return static_cast<int>(i);
  }
  return -1;
}

std::size_t MolGraph::component_count() const {
  std::vector<int> parent(atoms_.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  };
  std::size_t components = atoms_.size();
  for (const Bond& b : bonds_) {
    const int ra = find(b.a), rb = find(b.b);
    if (ra != rb) {
      parent[static_cast<std::size_t>(ra)] = rb;
      --components;
    }
  }
  return components;
}

namespace {

std::span<const int> shifted_valences(const Atom& atom) {
  if (atom.atomic_number <= 0) return {};
  const int z = atom.atomic_number - atom.charge;
  if (z < 1 || z > 118) return {};
  return element(z).valences;
}

}  // namespace

int target_valence(const Atom& atom, int used) {
  const auto list = shifted_valences(atom);
  if (list.empty()) return used;
  for (int v : list) {
    if (v >= used) return v;
  }
  return -1;
}

int max_valence(const Atom& atom) {
  const auto list = shifted_valences(atom);
  return list.empty() ? -1 : *std::max_element(list.begin(), list.end());
}

namespace {

bool is_organic_aliphatic(std::string_view s) {
  static constexpr std::string_view kOrganic[] = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
  return std::find(std::begin(kOrganic), std::end(kOrganic), s) != std::end(kOrganic);
}

bool is_aromatic_symbol(std::string_view s) {
  static constexpr std::string_view kAromatic[] = {"b", "c", "n", "o", "p", "s", "se", "as", "te"};
  return std::find(std::begin(kAromatic), std::end(kAromatic), s) != std::end(kAromatic);
}

int bond_units(BondOrder o) { return o == BondOrder::kAromatic ? 1 : static_cast<int>(o); }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text), graph_(std::string(text)) {}

  MolGraph run() {
    if (text_.empty()) throw ParseError("empty SMILES", 0);
    while (pos_ < text_.size()) step();
    if (pending_) throw ParseError("bond without a following atom", pending_pos_);
    if (!branches_.empty()) throw ParseError("unbalanced parentheses", branch_pos_.back());
    if (!rings_.empty()) throw ParseError("unmatched ring closure " + std::to_string(rings_.begin()->first),
                                          rings_.begin()->second.position);
    if (graph_.atom_count() == 0) throw ParseError("no atoms", 0);
    assign_implicit_hydrogens();
    return std::move(graph_);
  }

 private:
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
    std::size_t position;
  };

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void step() {
    const char c = peek();
    const std::size_t at = pos_;
    if (c == '[' || c == '*' || std::isalpha(static_cast<unsigned char>(c))) {
      const int idx = c == '[' ? bracket_atom() : organic_atom();
      if (prev_ >= 0) {
        graph_.add_bond(prev_, idx, pending_.value_or(default_order(prev_, idx)), at);
      } else if (pending_) {
        throw ParseError("bond without a preceding atom", pending_pos_);
      }
      pending_.reset();
      prev_ = idx;
      return;
    }
    switch (c) {
      case '-': case '=': case '#': case ':': case '/': case '\\': case '$':
        bond_symbol(c);
        return;
      case '(':
        if (prev_ < 0) throw ParseError("branch without a preceding atom", at);
        if (pending_) throw ParseError("bond before branch", at);
        if (peek(1) == ')') throw ParseError("empty branch", at);
        branches_.push_back(prev_);
        branch_pos_.push_back(at);
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) throw ParseError("unbalanced parentheses", at);
        if (pending_) throw ParseError("bond without a following atom", pending_pos_);
        prev_ = branches_.back();
        branches_.pop_back();
        branch_pos_.pop_back();
        ++pos_;
        return;
      case '.':
        if (pending_) throw ParseError("bond without a following atom", pending_pos_);
        prev_ = -1;
        ++pos_;
        return;
      case '%':
        if (!std::isdigit(static_cast<unsigned char>(peek(1))) ||
            !std::isdigit(static_cast<unsigned char>(peek(2)))) {
          throw ParseError("'%' must be followed by two digits", at);
        }
        ring_bond((peek(1) - '0') * 10 + (peek(2) - '0'), at);
        pos_ += 3;
        return;
      default:
        if (std::isdigit(static_cast<unsigned char>(c))) {
          ring_bond(c - '0', at);
          ++pos_;
          return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", at);
    }
  }

  void bond_symbol(char c) {
    if (prev_ < 0) throw ParseError("bond without a preceding atom", pos_);
    if (pending_) throw ParseError("consecutive bond symbols", pos_);
    switch (c) {
      case '=': pending_ = BondOrder::kDouble; break;
      case '#': pending_ = BondOrder::kTriple; break;
      case ':': pending_ = BondOrder::kAromatic; break;
      case '$': throw ParseError("quadruple bonds are not supported", pos_);
      default: pending_ = BondOrder::kSingle; break;
    }
    pending_pos_ = pos_;
    ++pos_;
  }

  BondOrder default_order(int a, int b) const {
    return graph_.atom(static_cast<std::size_t>(a)).aromatic && graph_.atom(static_cast<std::size_t>(b)).aromatic
               ? BondOrder::kAromatic
               : BondOrder::kSingle;
  }

  void ring_bond(int number, std::size_t at) {
    if (prev_ < 0) throw ParseError("ring closure without a preceding atom", at);
    const auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, OpenRing{prev_, pending_, at});
    } else {
      const OpenRing open = it->second;
      rings_.erase(it);
      if (open.order && pending_ && *open.order != *pending_) {
        throw ParseError("conflicting ring closure bond orders", at);
      }
      const BondOrder order = pending_ ? *pending_ : open.order.value_or(default_order(open.atom, prev_));
      graph_.add_bond(open.atom, prev_, order, at);
    }
    pending_.reset();
  }

  int organic_atom() {
    const std::size_t at = pos_;
    const char c = peek();
    if (c == '*') {
      ++pos_;
      return graph_.add_atom(Atom{});
    }
    std::string sym(1, c);
    if ((c == 'C' && peek(1) == 'l') || (c == 'B' && peek(1) == 'r')) sym += peek(1);
    Atom atom;
    if (std::islower(static_cast<unsigned char>(c))) {
      if (!is_aromatic_symbol(sym) || sym.size() != 1 || sym == "se" || sym == "as" || sym == "te") {
        throw ParseError("unknown organic-subset atom '" + sym + "'", at);
      }
      atom.aromatic = true;
      sym[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sym[0])));
    } else if (!is_organic_aliphatic(sym)) {
      throw ParseError("'" + sym + "' must be written in brackets", at);
    }
    atom.atomic_number = *atomic_number(sym);
    pos_ += sym.size();
    return graph_.add_atom(atom);
  }

  int read_number(int fallback) {
    if (!std::isdigit(static_cast<unsigned char>(peek()))) return fallback;
    int v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (peek() - '0');
      if (v > 100000) throw ParseError("number too large", pos_);
      ++pos_;
    }
    return v;
  }

  int bracket_atom() {
    const std::size_t open = pos_;
    const std::size_t close = text_.find(']', pos_);
    if (close == std::string_view::npos) throw ParseError("unterminated '['", open);
    ++pos_;
    Atom atom;
    atom.bracket = true;
    atom.isotope = read_number(0);

    const char c = peek();
    if (c == '*') {
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      const std::string two{c, peek(1)};
      if (std::islower(static_cast<unsigned char>(peek(1))) && atomic_number(two)) {
        atom.atomic_number = *atomic_number(two);
        pos_ += 2;
      } else if (auto z = atomic_number(std::string(1, c))) {
        atom.atomic_number = *z;
        ++pos_;
      } else {
        throw ParseError("unknown element", pos_);
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      const std::string two{c, peek(1)};
      std::string sym = is_aromatic_symbol(two) ? two : std::string(1, c);
      if (!is_aromatic_symbol(sym)) throw ParseError("unknown aromatic element", pos_);
      pos_ += sym.size();
      sym[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sym[0])));
      atom.atomic_number = *atomic_number(sym);
      atom.aromatic = true;
    } else {
      throw ParseError("missing element in bracket atom", pos_);
    }

    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') {
        ++pos_;
      } else {
        const std::string tag{peek(), peek(1)};
        if (tag == "TH" || tag == "AL" || tag == "SP" || tag == "TB" || tag == "OH") {
          pos_ += 2;
          if (read_number(-1) < 0) throw ParseError("chirality class needs a number", pos_);
        }
      }
    }
    if (peek() == 'H') {
      ++pos_;
      atom.explicit_h = read_number(1);
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      ++pos_;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = read_number(1);
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      if (magnitude > 15) throw ParseError("formal charge out of range", pos_);
      atom.charge = sign == '+' ? magnitude : -magnitude;
    }
    if (peek() == ':') {
      ++pos_;
      if (read_number(-1) < 0) throw ParseError("atom class needs a number", pos_);
    }
    if (pos_ != close) throw ParseError("bad bracket atom syntax", pos_);
    ++pos_;
    return graph_.add_atom(atom);
  }

  void assign_implicit_hydrogens() {
    std::vector<int> used(graph_.atom_count(), 0);
    for (const Bond& b : graph_.bonds()) {
      used[static_cast<std::size_t>(b.a)] += bond_units(b.order);
      used[static_cast<std::size_t>(b.b)] += bond_units(b.order);
    }
    for (std::size_t i = 0; i < graph_.atom_count(); ++i) {
      Atom& a = graph_.atoms()[i];
      if (a.bracket || a.atomic_number == 0) continue;
      const int v = target_valence(a, used[i]);
      if (v < 0) continue;  // over-valent; reported by validation
      int h = v - used[i];
      // An aromatic atom with spare valence contributes one electron to the
      // pi system; that unit is not available for hydrogen.
      if (a.aromatic && h >= 1) --h;
      a.implicit_h = h;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph graph_;
  int prev_ = -1;
  std::optional<BondOrder> pending_;
  std::size_t pending_pos_ = 0;
  std::vector<int> branches_;
  std::vector<std::size_t> branch_pos_;
  std::map<int, OpenRing> rings_;
};

}  // namespace

MolGraph parse(std::string_view text) { return Parser(text).run(); }

}  // namespace lmol::smiles

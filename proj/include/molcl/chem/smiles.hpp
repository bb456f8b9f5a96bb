// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "molcl/chem/elements.hpp"
#include "molcl/chem/mol_graph.hpp"
#include "molcl/chem/rings.hpp"
#include "molcl/error.hpp"

namespace molcl::chem {

namespace detail {

struct BondSymbol {
  bool present = false;
  BondOrder order = BondOrder::Single;
  BondDirection direction = BondDirection::None;
};

struct OpenRing {
  int atom;
  BondSymbol symbol;
  std::size_t stereo_slot;
};

inline constexpr int kPendingRingSlot = -2;

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  MolGraph parse() {
    if (text_.empty()) throw Error(Errc::EmptyInput, "empty SMILES");
    for (unsigned char c : text_) {
      if (c > 127) throw Error(Errc::InvalidSyntax, "non-ASCII character in SMILES");
    }
    mol_.source_smiles = std::string(text_);
    while (pos_ < text_.size()) step();
    if (!branches_.empty()) fail(Errc::UnbalancedParenthesis, "unclosed branch '('");
    if (!open_rings_.empty()) {
      fail(Errc::UnclosedRingBond,
           "ring bond " + std::to_string(open_rings_.begin()->first) + " never closed");
    }
    if (pending_.present) fail(Errc::InvalidSyntax, "dangling bond symbol");
    if (mol_.atoms.empty()) throw Error(Errc::EmptyInput, "no atoms in SMILES");
    finalize();
    return std::move(mol_);
  }

 private:
  [[noreturn]] void fail(Errc code, const std::string& what) const {
    throw Error(code, what + " at position " + std::to_string(pos_) + " in '" +
                          std::string(text_) + "'");
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void step() {
    const char c = peek();
    switch (c) {
      case '(':
        if (prev_ < 0) fail(Errc::InvalidSyntax, "branch before any atom");
        if (pending_.present) fail(Errc::InvalidSyntax, "bond symbol before '('");
        if (peek(1) == ')') fail(Errc::InvalidSyntax, "empty branch");
        branches_.push_back(prev_);
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) fail(Errc::UnbalancedParenthesis, "unmatched ')'");
        if (pending_.present) fail(Errc::InvalidSyntax, "bond symbol before ')'");
        prev_ = branches_.back();
        branches_.pop_back();
        ++pos_;
        return;
      case '-': case '=': case '#': case ':': case '/': case '\\':
        read_bond_symbol();
        return;
      case '$':
        fail(Errc::InvalidSyntax, "quadruple bonds are not supported");
      case '.':
        fail(Errc::MultiFragmentInput, "dot-disconnected SMILES");
      case '%':
        ring_closure(read_ring_number());
        return;
      case '[':
        add_atom(read_bracket_atom());
        return;
      case '*':
        fail(Errc::UnknownAtomSymbol, "wildcard atoms are not supported");
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ring_closure(read_ring_number());
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      add_atom(read_organic_atom());
      return;
    }
    fail(Errc::InvalidSyntax, std::string("unexpected character '") + c + "'");
  }

  void read_bond_symbol() {
    if (pending_.present) fail(Errc::InvalidSyntax, "consecutive bond symbols");
    if (prev_ < 0) fail(Errc::InvalidSyntax, "bond before any atom");
    BondSymbol s;
    s.present = true;
    switch (peek()) {
      case '-': s.order = BondOrder::Single; break;
      case '=': s.order = BondOrder::Double; break;
      case '#': s.order = BondOrder::Triple; break;
      case ':': s.order = BondOrder::Aromatic; break;
      case '/': s.direction = BondDirection::EndUpRight; break;
      case '\\': s.direction = BondDirection::EndDownRight; break;
      default: break;
    }
    pending_ = s;
    ++pos_;
  }

  int read_ring_number() {
    if (peek() == '%') {
      if (!std::isdigit(static_cast<unsigned char>(peek(1))) ||
          !std::isdigit(static_cast<unsigned char>(peek(2)))) {
        fail(Errc::InvalidSyntax, "'%' must be followed by two digits");
      }
      const int n = (peek(1) - '0') * 10 + (peek(2) - '0');
      pos_ += 3;
      return n;
    }
    const int n = peek() - '0';
    ++pos_;
    return n;
  }

  Atom read_organic_atom() {
    Atom atom;
    const char c = peek();
    if (c == 'C' && peek(1) == 'l') {
      atom.atomic_number = 17;
      pos_ += 2;
      return atom;
    }
    if (c == 'B' && peek(1) == 'r') {
      atom.atomic_number = 35;
      pos_ += 2;
      return atom;
    }
    switch (c) {
      case 'B': atom.atomic_number = 5; break;
      case 'C': atom.atomic_number = 6; break;
      case 'N': atom.atomic_number = 7; break;
      case 'O': atom.atomic_number = 8; break;
      case 'P': atom.atomic_number = 15; break;
      case 'S': atom.atomic_number = 16; break;
      case 'F': atom.atomic_number = 9; break;
      case 'I': atom.atomic_number = 53; break;
      case 'b': atom.atomic_number = 5; atom.aromatic = true; break;
      case 'c': atom.atomic_number = 6; atom.aromatic = true; break;
      case 'n': atom.atomic_number = 7; atom.aromatic = true; break;
      case 'o': atom.atomic_number = 8; atom.aromatic = true; break;
      case 'p': atom.atomic_number = 15; atom.aromatic = true; break;
      case 's': atom.atomic_number = 16; atom.aromatic = true; break;
      default:
        fail(Errc::UnknownAtomSymbol, std::string("unknown atom symbol '") + c + "'");
    }
    ++pos_;
    return atom;
  }

  int read_int() {
    int v = 0;
    bool any = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (peek() - '0');
      ++pos_;
      any = true;
      if (v > 100000) fail(Errc::InvalidSyntax, "number too large");
    }
    return any ? v : -1;
  }

  Atom read_bracket_atom() {
    ++pos_;  // '['
    Atom atom;
    atom.bracket = true;
    read_int();  // isotope, discarded

    const char c0 = peek();
    const char c1 = peek(1);
    if (c0 == '*') fail(Errc::UnknownAtomSymbol, "wildcard atoms are not supported");
    if (std::isupper(static_cast<unsigned char>(c0))) {
      int z = 0;
      if (std::islower(static_cast<unsigned char>(c1))) {
        z = atomic_number_of(std::string{c0, c1});
        if (z) pos_ += 2;
      }
      if (!z) {
        z = atomic_number_of(std::string{c0});
        if (!z) fail(Errc::UnknownAtomSymbol, std::string("unknown element '") + c0 + "'");
        ++pos_;
      }
      atom.atomic_number = z;
    } else if (std::islower(static_cast<unsigned char>(c0))) {
      int z = 0;
      if ((c0 == 's' && c1 == 'e') || (c0 == 'a' && c1 == 's')) {
        z = c0 == 's' ? 34 : 33;
        pos_ += 2;
      } else {
        z = atomic_number_of(std::string{static_cast<char>(std::toupper(c0))});
        if (!z || !can_be_aromatic(z)) {
          fail(Errc::UnknownAtomSymbol, std::string("unknown aromatic symbol '") + c0 + "'");
        }
        ++pos_;
      }
      atom.atomic_number = z;
      atom.aromatic = true;
    } else {
      fail(Errc::InvalidSyntax, "bracket atom without element symbol");
    }

    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') {
        ++pos_;
        atom.chirality = Chirality::CW;
      } else if (std::isupper(static_cast<unsigned char>(peek())) && peek() != 'H') {
        // @TH1, @AL2, @SP3, @TB10, @OH20 ...
        while (std::isupper(static_cast<unsigned char>(peek()))) ++pos_;
        read_int();
        atom.chirality = Chirality::Other;
      } else {
        atom.chirality = Chirality::CCW;
      }
    }

    atom.explicit_h = 0;
    if (peek() == 'H') {
      ++pos_;
      const int n = read_int();
      atom.explicit_h = n < 0 ? 1 : n;
    }

    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      ++pos_;
      int magnitude = 1;
      const int n = read_int();
      if (n >= 0) {
        magnitude = n;
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
      if (atom.formal_charge < -5 || atom.formal_charge > 5) {
        fail(Errc::InvalidSyntax, "formal charge outside -5..+5");
      }
    }

    if (peek() == ':') {  // atom class, discarded
      ++pos_;
      if (read_int() < 0) fail(Errc::InvalidSyntax, "atom class without number");
    }
    if (peek() != ']') fail(Errc::InvalidSyntax, "unterminated bracket atom");
    ++pos_;
    return atom;
  }

  static bool same_symbol(const BondSymbol& x, const BondSymbol& y) {
    return x.order == y.order;
  }

  void add_bond(int a, int b, const BondSymbol& s) {
    if (a == b) fail(Errc::InvalidSyntax, "atom bonded to itself");
    for (const Bond& existing : mol_.bonds) {
      if ((existing.a == a && existing.b == b) || (existing.a == b && existing.b == a)) {
        fail(Errc::InvalidSyntax, "duplicate bond between the same atoms");
      }
    }
    Bond bond;
    bond.a = a;
    bond.b = b;
    bond.implicit_order = !s.present;
    const bool both_aromatic = mol_.atoms[a].aromatic && mol_.atoms[b].aromatic;
    if (s.present && s.direction == BondDirection::None) {
      bond.order = s.order;
    } else {
      bond.order = both_aromatic && !s.present ? BondOrder::Aromatic : BondOrder::Single;
    }
    bond.direction = s.direction;
    if (bond.order == BondOrder::Aromatic && !both_aromatic) {
      fail(Errc::InvalidSyntax, "aromatic bond between non-aromatic atoms");
    }
    mol_.bonds.push_back(bond);
  }

  void add_atom(Atom atom) {
    const int idx = static_cast<int>(mol_.atoms.size());
    const int h = atom.explicit_h.value_or(0);
    mol_.atoms.push_back(std::move(atom));
    Atom& added = mol_.atoms.back();
    if (prev_ >= 0) {
      add_bond(prev_, idx, pending_);
      added.stereo_neighbors.push_back(prev_);
      mol_.atoms[prev_].stereo_neighbors.push_back(idx);
    }
    if (h > 0) mol_.atoms[idx].stereo_neighbors.push_back(kImplicitHydrogen);
    pending_ = {};
    prev_ = idx;
  }

  void ring_closure(int number) {
    if (prev_ < 0) fail(Errc::InvalidSyntax, "ring bond before any atom");
    auto it = open_rings_.find(number);
    if (it == open_rings_.end()) {
      Atom& atom = mol_.atoms[prev_];
      open_rings_[number] = OpenRing{prev_, pending_, atom.stereo_neighbors.size()};
      atom.stereo_neighbors.push_back(kPendingRingSlot);
      pending_ = {};
      return;
    }
    const OpenRing open = it->second;
    open_rings_.erase(it);
    BondSymbol symbol = open.symbol;
    if (pending_.present) {
      BondSymbol closing = pending_;
      // a direction written at the closing digit reads closing -> opening
      if (closing.direction == BondDirection::EndUpRight) {
        closing.direction = BondDirection::EndDownRight;
      } else if (closing.direction == BondDirection::EndDownRight) {
        closing.direction = BondDirection::EndUpRight;
      }
      if (symbol.present && !same_symbol(symbol, closing)) {
        fail(Errc::InvalidSyntax, "conflicting ring-closure bond symbols");
      }
      if (!symbol.present) symbol = closing;
    }
    add_bond(open.atom, prev_, symbol);
    mol_.atoms[open.atom].stereo_neighbors[open.stereo_slot] = prev_;
    mol_.atoms[prev_].stereo_neighbors.push_back(open.atom);
    pending_ = {};
  }

  void assign_double_bond_stereo() {
    // Is the directional neighbour drawn above the double-bond atom?
    auto neighbor_up = [&](int center, const Bond& b) {
      const bool up_symbol = b.direction == BondDirection::EndUpRight;
      // neighbour follows the centre in a -> b orientation
      return b.a == center ? up_symbol : !up_symbol;
    };
    for (Bond& dbl : mol_.bonds) {
      if (dbl.order != BondOrder::Double) continue;
      int side[2] = {-1, -1};
      const int ends[2] = {dbl.a, dbl.b};
      for (int e = 0; e < 2; ++e) {
        for (const Neighbor& n : mol_.neighbors(ends[e])) {
          const Bond& b = mol_.bonds[n.bond];
          if (&b == &dbl || b.direction == BondDirection::None) continue;
          side[e] = neighbor_up(ends[e], b) ? 1 : 0;
          break;
        }
      }
      if (side[0] < 0 || side[1] < 0) continue;
      dbl.stereo = side[0] == side[1] ? BondStereo::Cis : BondStereo::Trans;
    }
  }

  void finalize() {
    mol_.rebuild_adjacency();
    mol_.rings = perceive_rings(mol_);
    mark_ring_membership(mol_);
    // An unmarked bond between aromatic atoms outside any ring (biaryl link)
    // is a single bond.
    for (Bond& b : mol_.bonds) {
      if (b.order == BondOrder::Aromatic && b.implicit_order && !b.in_ring) {
        b.order = BondOrder::Single;
      }
    }
    std::vector<BondOrder> orders;
    for (int i = 0; i < mol_.num_atoms(); ++i) {
      Atom& atom = mol_.atoms[i];
      orders.clear();
      for (const Neighbor& n : mol_.neighbors(i)) orders.push_back(mol_.bonds[n.bond].order);
      atom.degree = static_cast<int>(orders.size());
      try {
        atom.implicit_h = assign_hydrogens(atom, orders);
      } catch (const Error& e) {
        throw Error(e.code(), e.message() + " (atom " + std::to_string(i) +
                                  " in '" + mol_.source_smiles + "')");
      }
      atom.hybridization = infer_hybridization(atom, orders);
      if (atom.chirality == Chirality::Unspecified) atom.stereo_neighbors.clear();
    }
    assign_double_bond_stereo();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph mol_;
  int prev_ = -1;
  BondSymbol pending_;
  std::vector<int> branches_;
  std::map<int, OpenRing> open_rings_;
};

}  // namespace detail

/// Parses one SMILES string into an attributed molecular graph with rings,
/// hydrogens, hybridisation and double-bond stereo populated.
inline MolGraph parse_smiles(std::string_view text) {
  return detail::SmilesParser(text).parse();
}

// ---------------------------------------------------------------------------
// Writing

struct WriteOptions {
  // Atom visiting priority (lower first); defaults to atom index.
  const std::vector<int>* ranks = nullptr;
  // Emit hydrogen counts, bracket atoms and stereo. Off yields a bare
  // heavy-atom skeleton string used for scaffold keys.
  bool full = true;
};

namespace detail {

inline int permutation_parity(std::vector<int> from, const std::vector<int>& to) {
  // number of transpositions to turn `from` into `to`, modulo 2
  int swaps = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i] == to[i]) continue;
    auto it = std::find(from.begin() + i + 1, from.end(), to[i]);
    if (it == from.end()) return -1;
    std::iter_swap(from.begin() + i, it);
    ++swaps;
  }
  return swaps % 2;
}

class SmilesWriter {
 public:
  SmilesWriter(const MolGraph& mol, const WriteOptions& opt) : mol_(mol), opt_(opt) {
    const int n = mol.num_atoms();
    rank_.resize(n);
    if (opt.ranks) {
      rank_ = *opt.ranks;
    } else {
      std::iota(rank_.begin(), rank_.end(), 0);
    }
  }

  std::string write() {
    const int n = mol_.num_atoms();
    if (n == 0) return {};
    visited_.assign(n, 0);
    openings_.assign(n, {});
    closings_.assign(n, {});
    children_.assign(n, {});
    parent_bond_.assign(n, -1);
    parent_.assign(n, -1);
    ring_bond_.assign(mol_.num_bonds(), 0);

    std::vector<int> starts(n);
    std::iota(starts.begin(), starts.end(), 0);
    std::sort(starts.begin(), starts.end(), [&](int l, int r) { return rank_[l] < rank_[r]; });
    std::string out;
    bool first = true;
    for (int s : starts) {
      if (visited_[s]) continue;
      plan(s);
      if (!first) out += '.';
      first = false;
      digit_owner_.assign(100, -1);
      emit(s, out);
    }
    return out;
  }

 private:
  std::vector<Neighbor> ordered_neighbors(int u) const {
    std::vector<Neighbor> list(mol_.neighbors(u).begin(), mol_.neighbors(u).end());
    std::sort(list.begin(), list.end(),
              [&](const Neighbor& l, const Neighbor& r) { return rank_[l.atom] < rank_[r.atom]; });
    return list;
  }

  void plan(int root) {
    // iterative DFS: decides tree edges and ring-closure edges
    struct Frame {
      int atom;
      std::vector<Neighbor> nbrs;
      std::size_t next = 0;
    };
    std::vector<Frame> stack;
    visited_[root] = 1;
    stack.push_back({root, ordered_neighbors(root)});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next == f.nbrs.size()) {
        visited_[f.atom] = 2;
        stack.pop_back();
        continue;
      }
      const Neighbor nb = f.nbrs[f.next++];
      if (nb.bond == parent_bond_[f.atom] || ring_bond_[nb.bond]) continue;
      if (visited_[nb.atom] == 1) {
        // back edge to an open ancestor: ring closure opened there
        ring_bond_[nb.bond] = 1;
        openings_[nb.atom].push_back(nb.bond);
        closings_[f.atom].push_back(nb.bond);
        continue;
      }
      if (visited_[nb.atom] == 2) continue;
      visited_[nb.atom] = 1;
      parent_[nb.atom] = f.atom;
      parent_bond_[nb.atom] = nb.bond;
      children_[f.atom].push_back(nb.atom);
      const int child = nb.atom;
      stack.push_back({child, ordered_neighbors(child)});
    }
  }

  std::string atom_text(int i, const std::vector<int>& written_neighbors) const {
    const Atom& a = mol_.atoms[i];
    std::string sym(element_symbol(a.atomic_number));
    if (a.aromatic) {
      for (char& ch : sym) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    if (!opt_.full) {
      if (a.formal_charge == 0 && in_organic_subset(a.atomic_number)) return sym;
      return "[" + sym + charge_text(a.formal_charge) + "]";
    }
    const bool chiral = a.chirality != Chirality::Unspecified;
    const bool needs_bracket = a.bracket || a.formal_charge != 0 || chiral ||
                               !in_organic_subset(a.atomic_number) ||
                               (a.aromatic && !can_be_aromatic(a.atomic_number));
    if (!needs_bracket) return sym;
    std::string out = "[" + sym;
    if (chiral) {
      Chirality c = a.chirality;
      if (c == Chirality::CW || c == Chirality::CCW) {
        const int parity = permutation_parity(a.stereo_neighbors, written_neighbors);
        if (parity == 1) c = c == Chirality::CW ? Chirality::CCW : Chirality::CW;
      }
      out += c == Chirality::CW ? "@@" : c == Chirality::CCW ? "@" : "@TH1";
    }
    const int h = a.total_h();
    if (h > 0) out += "H";
    if (h > 1) out += std::to_string(h);
    out += charge_text(a.formal_charge);
    out += "]";
    return out;
  }

  static std::string charge_text(int charge) {
    if (charge == 0) return {};
    std::string s = charge > 0 ? "+" : "-";
    if (std::abs(charge) > 1) s += std::to_string(std::abs(charge));
    return s;
  }

  std::string bond_text(int bond, int from) const {
    const Bond& b = mol_.bonds[bond];
    const bool both_aromatic = mol_.atoms[b.a].aromatic && mol_.atoms[b.b].aromatic;
    if (opt_.full && b.direction != BondDirection::None && b.order == BondOrder::Single) {
      const bool forward = b.a == from;
      const bool up = (b.direction == BondDirection::EndUpRight) == forward;
      return up ? "/" : "\\";
    }
    switch (b.order) {
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic: return both_aromatic ? "" : ":";
      case BondOrder::Single: return both_aromatic ? "-" : "";
    }
    return {};
  }

  int take_digit(int bond) {
    for (int d = 1; d < 100; ++d) {
      if (digit_owner_[d] < 0) {
        digit_owner_[d] = bond;
        return d;
      }
    }
    throw Error(Errc::InvalidSyntax, "more than 99 simultaneous ring closures");
  }

  static std::string digit_text(int d) {
    return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
  }

  void emit(int u, std::string& out) {
    // Written neighbour order: parent, H, ring digits, children.
    std::vector<int> written;
    if (parent_[u] >= 0) written.push_back(parent_[u]);
    if (mol_.atoms[u].total_h() > 0 && mol_.atoms[u].chirality != Chirality::Unspecified) {
      written.push_back(kImplicitHydrogen);
    }
    std::string digits;
    for (int bond : closings_[u]) {
      int d = -1;
      for (int k = 1; k < 100; ++k) {
        if (digit_owner_[k] == bond) d = k;
      }
      digit_owner_[d] = -1;
      digits += digit_text(d);
      written.push_back(mol_.bonds[bond].other(u));
    }
    for (int bond : openings_[u]) {
      const int d = take_digit(bond);
      digits += bond_text(bond, u) + digit_text(d);
      written.push_back(mol_.bonds[bond].other(u));
    }
    for (int c : children_[u]) written.push_back(c);

    out += atom_text(u, written);
    out += digits;
    const auto& kids = children_[u];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool branch = i + 1 < kids.size();
      if (branch) out += '(';
      out += bond_text(parent_bond_[kids[i]], u);
      emit(kids[i], out);
      if (branch) out += ')';
    }
  }

  const MolGraph& mol_;
  WriteOptions opt_;
  std::vector<int> rank_;
  std::vector<int> visited_;
  std::vector<std::vector<int>> openings_, closings_, children_;
  std::vector<int> parent_bond_, parent_;
  std::vector<char> ring_bond_;
  std::vector<int> digit_owner_;
};

}  // namespace detail

/// Emits a SMILES string that parses back to an isomorphic graph.
inline std::string write_smiles(const MolGraph& mol, const WriteOptions& opt = {}) {
  return detail::SmilesWriter(mol, opt).write();
}

}  // namespace molcl::chem

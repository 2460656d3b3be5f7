//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subdesc/chem/aromaticity.hpp"
#include "subdesc/chem/molgraph.hpp"
#include "subdesc/error.hpp"

namespace subdesc::chem {

namespace detail {

struct ParsedAtom {
  Atom atom;
  bool bracket = false;
  std::size_t offset = 0;
};

struct PendingBond {
  int begin, end;
  std::optional<BondOrder> order;  // nullopt: implicit (single or aromatic)
};

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : s_(text) {}

  MolGraph parse() {
    if (s_.empty()) throw SmilesError("empty SMILES", 0);
    int prev = -1;
    std::optional<BondOrder> pending;
    std::size_t pending_pos = 0;
    bool have_pending = false;
    std::vector<int> branches;

    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (static_cast<unsigned char>(c) >= 0x80)
        throw SmilesError("non-ASCII byte in SMILES", pos_);
      if (c == '(') {
        if (prev < 0) throw SmilesError("branch before any atom", pos_);
        if (have_pending) throw SmilesError("bond before branch", pos_);
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == ')')
          throw SmilesError("empty branch", pos_);
        branches.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branches.empty()) throw SmilesError("unmatched ')'", pos_);
        if (have_pending) throw SmilesError("dangling bond", pending_pos);
        prev = branches.back();
        branches.pop_back();
        ++pos_;
      } else if (c == '.') {
        throw SmilesError("multi-component SMILES is not supported", pos_);
      } else if (is_bond_char(c)) {
        if (have_pending) throw SmilesError("consecutive bond symbols", pos_);
        if (prev < 0) throw SmilesError("bond before any atom", pos_);
        pending = bond_from_char(c);
        have_pending = true;
        pending_pos = pos_;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (prev < 0) throw SmilesError("ring closure before any atom", pos_);
        std::size_t at = pos_;
        int num = ring_number();
        ring_bond(prev, num, have_pending ? pending : std::nullopt, at);
        have_pending = false;
        pending.reset();
      } else {
        std::size_t at = pos_;
        int idx = parse_atom();
        if (prev >= 0) {
          add_bond(prev, idx, have_pending ? pending : std::nullopt, at);
          stereo_slots_[prev].push_back(idx);
        }
        // Stereo order: preceding atom, then the bracket hydrogen.
        if (prev >= 0) stereo_slots_[idx].push_back(prev);
        if (atoms_[idx].bracket && atoms_[idx].atom.implicit_h > 0)
          stereo_slots_[idx].push_back(kImplicitHydrogen);
        have_pending = false;
        pending.reset();
        prev = idx;
      }
    }
    if (have_pending) throw SmilesError("dangling bond", pending_pos);
    if (!branches.empty()) throw SmilesError("unclosed branch", s_.size());
    if (!open_rings_.empty())
      throw SmilesError("unmatched ring closure",
                        open_rings_.begin()->second.offset);
    return finish();
  }

 private:
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
    std::size_t offset;
    std::size_t slot;  // index into stereo_slots_[atom]
  };

  static bool is_bond_char(char c) {
    return c == '-' || c == '=' || c == '#' || c == ':' || c == '/' ||
           c == '\\' || c == '$';
  }

  BondOrder bond_from_char(char c) const {
    switch (c) {
      case '=': return BondOrder::kDouble;
      case '#': return BondOrder::kTriple;
      case ':': return BondOrder::kAromatic;
      case '$': throw SmilesError("quadruple bonds are not supported", pos_);
      default: return BondOrder::kSingle;  // '-', '/', '\' (stereo ignored)
    }
  }

  int ring_number() {
    if (s_[pos_] == '%') {
      if (pos_ + 2 >= s_.size() ||
          !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2])))
        throw SmilesError("malformed %nn ring closure", pos_);
      int n = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
      pos_ += 3;
      return n;
    }
    return s_[pos_++] - '0';
  }

  void ring_bond(int atom, int num, std::optional<BondOrder> order,
                 std::size_t at) {
    auto it = open_rings_.find(num);
    if (it == open_rings_.end()) {
      stereo_slots_[atom].push_back(-2);  // filled at closure
      open_rings_[num] = {atom, order, at, stereo_slots_[atom].size() - 1};
      return;
    }
    OpenRing open = it->second;
    open_rings_.erase(it);
    if (open.atom == atom) throw SmilesError("ring closure to same atom", at);
    if (open.order && order && *open.order != *order)
      throw SmilesError("conflicting ring-closure bond orders", at);
    add_bond(open.atom, atom, open.order ? open.order : order, at);
    stereo_slots_[open.atom][open.slot] = atom;
    stereo_slots_[atom].push_back(open.atom);
  }

  void add_bond(int a, int b, std::optional<BondOrder> order, std::size_t at) {
    for (const auto& pb : bonds_)
      if ((pb.begin == a && pb.end == b) || (pb.begin == b && pb.end == a))
        throw SmilesError("duplicate bond", at);
    bonds_.push_back({a, b, order});
  }

  int push_atom(Atom atom, bool bracket, std::size_t offset) {
    atoms_.push_back({std::move(atom), bracket, offset});
    stereo_slots_.emplace_back();
    return static_cast<int>(atoms_.size()) - 1;
  }

  int parse_atom() {
    const std::size_t start = pos_;
    const char c = s_[pos_];
    if (c == '[') return parse_bracket_atom();

    auto organic = [&](std::string_view sym, Element e, bool arom) {
      pos_ += sym.size();
      Atom a;
      a.element = e;
      a.aromatic = arom;
      return push_atom(a, false, start);
    };
    auto rest = s_.substr(pos_);
    if (rest.starts_with("Cl")) return organic("Cl", Element::Cl, false);
    if (rest.starts_with("Br")) return organic("Br", Element::Br, false);
    switch (c) {
      case 'B': return organic("B", Element::B, false);
      case 'C': return organic("C", Element::C, false);
      case 'N': return organic("N", Element::N, false);
      case 'O': return organic("O", Element::O, false);
      case 'P': return organic("P", Element::P, false);
      case 'S': return organic("S", Element::S, false);
      case 'F': return organic("F", Element::F, false);
      case 'I': return organic("I", Element::I, false);
      case 'b': return organic("b", Element::B, true);
      case 'c': return organic("c", Element::C, true);
      case 'n': return organic("n", Element::N, true);
      case 'o': return organic("o", Element::O, true);
      case 'p': return organic("p", Element::P, true);
      case 's': return organic("s", Element::S, true);
      case '*': throw SmilesError("wildcard atoms are not supported", pos_);
      default: break;
    }
    throw SmilesError(std::string("unexpected character '") + c + "'", pos_);
  }

  int parse_bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    auto peek = [&]() -> char { return pos_ < s_.size() ? s_[pos_] : '\0'; };
    if (std::isdigit(static_cast<unsigned char>(peek())))
      throw SmilesError("isotopes are not supported", pos_);

    Atom a;
    const std::size_t sym_at = pos_;
    if (peek() == '*') throw SmilesError("wildcard atoms are not supported", pos_);
    if (std::islower(static_cast<unsigned char>(peek()))) {
      std::string_view rest = s_.substr(pos_);
      std::string_view sym;
      for (std::string_view cand : {"se", "as", "te", "b", "c", "n", "o", "p", "s"})
        if (rest.starts_with(cand)) {
          sym = cand;
          break;
        }
      if (sym.empty()) throw SmilesError("invalid aromatic symbol", pos_);
      std::string up(sym);
      up[0] = static_cast<char>(std::toupper(up[0]));
      auto e = element_from_symbol(up);
      if (!e) throw SmilesError("unsupported element '" + up + "'", pos_);
      a.element = *e;
      a.aromatic = true;
      pos_ += sym.size();
    } else if (std::isupper(static_cast<unsigned char>(peek()))) {
      std::string sym(1, peek());
      ++pos_;
      if (std::islower(static_cast<unsigned char>(peek()))) {
        std::string two = sym + peek();
        if (element_from_symbol(two)) {
          sym = two;
          ++pos_;
        } else if (!element_from_symbol(sym)) {
          throw SmilesError("unsupported element '" + two + "'", sym_at);
        }
      }
      auto e = element_from_symbol(sym);
      if (!e) throw SmilesError("unsupported element '" + sym + "'", sym_at);
      a.element = *e;
    } else {
      throw SmilesError("expected element symbol", pos_);
    }

    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') {
        ++pos_;
        a.chirality = Chirality::kClockwise;
      } else {
        a.chirality = Chirality::kCounterclockwise;
      }
      if (std::isupper(static_cast<unsigned char>(peek())) && peek() != 'H')
        throw SmilesError("extended chirality classes are not supported", pos_);
    }
    if (peek() == 'H') {
      ++pos_;
      int h = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) h = s_[pos_++] - '0';
      a.implicit_h = h;
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      int q = 0;
      while (peek() == sign) ++q, ++pos_;
      if (q == 1 && std::isdigit(static_cast<unsigned char>(peek()))) {
        q = 0;
        while (std::isdigit(static_cast<unsigned char>(peek())))
          q = q * 10 + (s_[pos_++] - '0');
      }
      a.formal_charge = sign == '+' ? q : -q;
    }
    if (peek() == ':') {
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek())))
        throw SmilesError("malformed atom class", pos_);
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (peek() != ']') throw SmilesError("unterminated bracket atom", pos_);
    ++pos_;
    return push_atom(a, true, start);
  }

  MolGraph finish() {
    const int n = static_cast<int>(atoms_.size());
    std::vector<BondOrder> orders;
    for (const auto& pb : bonds_) {
      if (pb.order) {
        orders.push_back(*pb.order);
      } else {
        bool arom = atoms_[pb.begin].atom.aromatic && atoms_[pb.end].atom.aromatic;
        orders.push_back(arom ? BondOrder::kAromatic : BondOrder::kSingle);
      }
    }
    std::vector<int> bond_sum(n, 0);
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      bond_sum[bonds_[b].begin] += valence_of(orders[b]);
      bond_sum[bonds_[b].end] += valence_of(orders[b]);
    }

    // Hydrogen counts for organic-subset atoms; valence checks for all.
    for (int i = 0; i < n; ++i) {
      auto& pa = atoms_[i];
      Atom& a = pa.atom;
      if (a.element == Element::H) continue;
      const auto legal = legal_valences(a.element, a.formal_charge);
      if (!pa.bracket) {
        if (a.aromatic) {
          a.implicit_h = std::max(0, legal.front() - bond_sum[i] - 1);
        } else {
          auto v = std::find_if(legal.begin(), legal.end(),
                                [&](int x) { return x >= bond_sum[i]; });
          if (v == legal.end())
            throw SmilesError("valence violation on " +
                                  std::string(symbol(a.element)),
                              pa.offset);
          a.implicit_h = *v - bond_sum[i];
        }
      }
      const int total = bond_sum[i] + a.implicit_h;
      bool ok = false;
      if (a.aromatic) {
        for (int v : legal) ok = ok || total == v || total == v - 1;
      } else if (is_metal(a.element)) {
        ok = total <= legal.back();
      } else {
        for (int v : legal) ok = ok || total == v;
      }
      if (!ok)
        throw SmilesError(
            "valence violation on " + std::string(symbol(a.element)),
            pa.offset);
    }

    // Fold explicit hydrogen atoms into their heavy neighbour.
    std::vector<int> remap(n, -1);
    int kept = 0;
    for (int i = 0; i < n; ++i) {
      if (atoms_[i].atom.element != Element::H) {
        remap[i] = kept++;
        continue;
      }
      const auto& pa = atoms_[i];
      if (pa.atom.formal_charge != 0 || pa.atom.implicit_h != 0)
        throw SmilesError("charged or hydrogenated [H] is not supported",
                          pa.offset);
      int host = -1, degree = 0;
      for (std::size_t b = 0; b < bonds_.size(); ++b) {
        if (bonds_[b].begin == i) host = bonds_[b].end, ++degree;
        else if (bonds_[b].end == i) host = bonds_[b].begin, ++degree;
      }
      if (degree != 1 || atoms_[host].atom.element == Element::H)
        throw SmilesError("explicit hydrogen must have one heavy neighbour",
                          pa.offset);
      atoms_[host].atom.implicit_h += 1;
    }
    if (kept == 0) throw SmilesError("molecule has no heavy atoms", 0);

    std::vector<Atom> atoms;
    atoms.reserve(kept);
    for (int i = 0; i < n; ++i) {
      if (remap[i] < 0) continue;
      Atom a = atoms_[i].atom;
      if (a.chirality != Chirality::kNone) {
        for (int s : stereo_slots_[i]) {
          if (s == kImplicitHydrogen) a.stereo_neighbors.push_back(s);
          else if (remap[s] < 0) a.stereo_neighbors.push_back(kImplicitHydrogen);
          else a.stereo_neighbors.push_back(remap[s]);
        }
        // A centre needs four distinct ligands (hydrogens count once).
        int hs = 0;
        for (int s : a.stereo_neighbors) hs += s == kImplicitHydrogen;
        const int ligands =
            static_cast<int>(a.stereo_neighbors.size()) - hs + a.implicit_h;
        if (ligands != 4 || a.implicit_h > 1 || hs != a.implicit_h) {
          a.chirality = Chirality::kNone;
          a.stereo_neighbors.clear();
        }
      }
      atoms.push_back(std::move(a));
    }
    std::vector<Bond> bonds;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      int x = remap[bonds_[b].begin], y = remap[bonds_[b].end];
      if (x < 0 || y < 0) continue;
      bonds.push_back({x, y, orders[b], false});
    }

    MolGraph raw = MolGraph::build(std::move(atoms), std::move(bonds),
                                   std::string(s_));
    MolGraph g = perceive_aromaticity(raw);
    for (int i = 0; i < raw.num_atoms(); ++i)
      if (raw.atom(i).aromatic && !g.atom(i).aromatic) {
        std::size_t off = 0;
        for (int j = 0, k = 0; j < n; ++j)
          if (remap[j] >= 0 && k++ == i) off = atoms_[j].offset;
        throw SmilesError("aromatic atom is not part of an aromatic ring", off);
      }
    return g;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<ParsedAtom> atoms_;
  std::vector<PendingBond> bonds_;
  std::vector<std::vector<int>> stereo_slots_;
  std::map<int, OpenRing> open_rings_;
};

}  // namespace detail

/// Parses a single-component SMILES string into a molecular graph with
/// implicit hydrogens assigned, rings perceived and aromaticity applied.
/// Throws `SmilesError` carrying the byte offset of the failure.
inline MolGraph parse_smiles(std::string_view text) {
  return detail::SmilesParser(text).parse();
}

}  // namespace subdesc::chem

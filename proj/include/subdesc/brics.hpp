//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "subdesc/chem/molgraph.hpp"

namespace subdesc::brics {

using chem::BondOrder;
using chem::Element;
using chem::MolGraph;

/// A bond selected for cleavage and the BRICS rule (1..16) that claimed it.
struct CleavageSite {
  int bond = -1;
  int rule = 0;

  bool operator==(const CleavageSite&) const = default;
};

enum class Provenance { kBrics, kPair, kParent };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kBrics: return "brics";
    case Provenance::kPair: return "pair";
    case Provenance::kParent: return "parent";
  }
  return "";
}

/// A capped substructure of a parent molecule. `cap_per_atom[k]` is the
/// number of hydrogens added to `parent_atoms[k]`; `cap_h` is their sum.
struct Fragment {
  std::vector<int> parent_atoms;  // ascending
  std::vector<int> cap_per_atom;
  int cap_h = 0;
  Provenance provenance = Provenance::kBrics;
  int order_key = 0;

  bool operator==(const Fragment&) const = default;
};

struct FragmentSet {
  std::vector<Fragment> brics_fragments;
  std::vector<Fragment> pair_fragments;
  std::vector<CleavageSite> cleavages;

  bool operator==(const FragmentSet&) const = default;
};

/// Highest precedence first: carbonyl-adjacent, sulfonamide, aliphatic
/// heteroatom, aromatic attachment, specialised, conjugated C=C.
inline constexpr std::array<int, 16> kRulePrecedence{
    9, 10, 11, 14, 1, 2, 3, 4, 6, 7, 8, 12, 13, 15, 16, 5};

namespace detail {

inline bool is(const MolGraph& g, int a, Element e) {
  return g.atom(a).element == e;
}

inline bool has_double_to(const MolGraph& g, int a, Element e) {
  for (auto nb : g.neighbors(a))
    if (g.bond(nb.bond).order == BondOrder::kDouble && is(g, nb.atom, e))
      return true;
  return false;
}

inline bool carbonyl_carbon(const MolGraph& g, int a) {
  return is(g, a, Element::C) && has_double_to(g, a, Element::O);
}

inline bool aliphatic_carbon(const MolGraph& g, int a) {
  return is(g, a, Element::C) && !g.atom(a).aromatic;
}

inline bool aromatic_carbon(const MolGraph& g, int a) {
  return is(g, a, Element::C) && g.atom(a).aromatic;
}

// One side of a C=C is conjugated when the carbon has another single
// bond to an atom that itself carries a double, triple or aromatic bond.
inline bool conjugated_side(const MolGraph& g, int c, int other) {
  for (auto nb : g.neighbors(c)) {
    if (nb.atom == other || g.bond(nb.bond).order != BondOrder::kSingle)
      continue;
    for (auto nb2 : g.neighbors(nb.atom)) {
      if (nb2.atom == c) continue;
      auto o = g.bond(nb2.bond).order;
      if (o == BondOrder::kDouble || o == BondOrder::kTriple ||
          o == BondOrder::kAromatic)
        return true;
    }
  }
  return false;
}

// True when the ordered pair (x, y) matches `rule`.
inline bool matches_oriented(const MolGraph& g, int rule, int x, int y,
                             BondOrder order) {
  const bool single = order == BondOrder::kSingle;
  switch (rule) {
    case 1: return single && aliphatic_carbon(g, x) && is(g, y, Element::N);
    case 2: return single && aliphatic_carbon(g, x) && is(g, y, Element::O);
    case 3: return single && aliphatic_carbon(g, x) && is(g, y, Element::S);
    case 4: return single && aliphatic_carbon(g, x) && is(g, y, Element::P);
    case 5:
      return order == BondOrder::kDouble && aliphatic_carbon(g, x) &&
             aliphatic_carbon(g, y) && conjugated_side(g, x, y) &&
             conjugated_side(g, y, x);
    // Aromatic attachment rules need a linking heteroatom; terminal
    // substituents (phenol OH, aniline NH2, thiol SH) stay on the ring.
    case 6:
      return single && aromatic_carbon(g, x) && is(g, y, Element::N) &&
             g.degree(y) >= 2;
    case 7:
      return single && aromatic_carbon(g, x) && is(g, y, Element::O) &&
             g.degree(y) >= 2;
    case 8:
      return single && aromatic_carbon(g, x) && is(g, y, Element::S) &&
             g.degree(y) >= 2;
    case 9:
      return single && is(g, x, Element::C) && carbonyl_carbon(g, y);
    case 10: return single && is(g, x, Element::N) && carbonyl_carbon(g, y);
    case 11: return single && is(g, x, Element::O) && carbonyl_carbon(g, y);
    case 12:
      return order == BondOrder::kTriple && is(g, x, Element::C) &&
             is(g, y, Element::C);
    case 13: return single && is(g, x, Element::C) && is(g, y, Element::Si);
    case 14:
      return single && is(g, x, Element::S) && has_double_to(g, x, Element::O) &&
             is(g, y, Element::N);
    case 15: return single && is(g, x, Element::C) && is(g, y, Element::B);
    case 16: return single && is(g, x, Element::C) && is(g, y, Element::Sn);
    default: return false;
  }
}

inline int component_of(const std::vector<Fragment>& frags, int atom) {
  for (std::size_t f = 0; f < frags.size(); ++f)
    if (std::binary_search(frags[f].parent_atoms.begin(),
                           frags[f].parent_atoms.end(), atom))
      return static_cast<int>(f);
  return -1;
}

}  // namespace detail

/// Rule claiming bond `b`, or 0. Ring bonds are never cleavable.
inline int matching_rule(const MolGraph& g, int b) {
  const auto& bd = g.bond(b);
  if (bd.in_ring) return 0;
  for (int rule : kRulePrecedence)
    if (detail::matches_oriented(g, rule, bd.begin, bd.end, bd.order) ||
        detail::matches_oriented(g, rule, bd.end, bd.begin, bd.order))
      return rule;
  return 0;
}

/// Every acyclic bond matched by a cleavage rule, in bond-index order.
inline std::vector<CleavageSite> find_cleavage_bonds(const MolGraph& g) {
  std::vector<CleavageSite> out;
  for (int b = 0; b < g.num_bonds(); ++b)
    if (int rule = matching_rule(g, b)) out.push_back({b, rule});
  return out;
}

/// Removes all cleavage bonds at once and caps each broken end with
/// hydrogens matching the bond order. Fragments are ordered by their
/// smallest parent atom index; pair substructures follow `pair_substructures`.
inline FragmentSet fragment(const MolGraph& g) {
  FragmentSet fs;
  fs.cleavages = find_cleavage_bonds(g);
  const int n = g.num_atoms();
  std::vector<bool> cut(g.num_bonds(), false);
  std::vector<int> cap(n, 0);
  for (const auto& c : fs.cleavages) {
    cut[c.bond] = true;
    const auto& bd = g.bond(c.bond);
    cap[bd.begin] += chem::valence_of(bd.order);
    cap[bd.end] += chem::valence_of(bd.order);
  }

  std::vector<bool> seen(n, false);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    Fragment f;
    std::vector<int> todo{s};
    seen[s] = true;
    while (!todo.empty()) {
      int v = todo.back();
      todo.pop_back();
      f.parent_atoms.push_back(v);
      for (auto nb : g.neighbors(v))
        if (!cut[nb.bond] && !seen[nb.atom]) {
          seen[nb.atom] = true;
          todo.push_back(nb.atom);
        }
    }
    std::sort(f.parent_atoms.begin(), f.parent_atoms.end());
    for (int a : f.parent_atoms) f.cap_per_atom.push_back(cap[a]);
    for (int c : f.cap_per_atom) f.cap_h += c;
    f.provenance = fs.cleavages.empty() ? Provenance::kParent : Provenance::kBrics;
    fs.brics_fragments.push_back(std::move(f));
  }
  for (std::size_t i = 0; i < fs.brics_fragments.size(); ++i)
    fs.brics_fragments[i].order_key = static_cast<int>(i);
  return fs;
}

/// One fragment per cleavage: the union of the two BRICS fragments the bond
/// joined, with that bond restored. Only outer-boundary cleavages keep caps.
inline std::vector<Fragment> pair_substructures(const FragmentSet& fs,
                                                const MolGraph& g) {
  std::vector<Fragment> out;
  for (const auto& c : fs.cleavages) {
    const auto& bd = g.bond(c.bond);
    const int fa = detail::component_of(fs.brics_fragments, bd.begin);
    const int fb = detail::component_of(fs.brics_fragments, bd.end);
    const Fragment& A = fs.brics_fragments[fa];
    const Fragment& B = fs.brics_fragments[fb];
    Fragment p;
    p.provenance = Provenance::kPair;
    std::vector<std::pair<int, int>> merged;
    for (std::size_t k = 0; k < A.parent_atoms.size(); ++k)
      merged.emplace_back(A.parent_atoms[k], A.cap_per_atom[k]);
    for (std::size_t k = 0; k < B.parent_atoms.size(); ++k)
      merged.emplace_back(B.parent_atoms[k], B.cap_per_atom[k]);
    std::sort(merged.begin(), merged.end());
    const int restored = chem::valence_of(bd.order);
    for (auto [atom, capped] : merged) {
      if (atom == bd.begin || atom == bd.end) capped -= restored;
      p.parent_atoms.push_back(atom);
      p.cap_per_atom.push_back(capped);
      p.cap_h += capped;
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// BRICS fragments (or the lone parent) followed by pair substructures;
/// `order_key` is the position in this sequence.
inline std::vector<Fragment> substructure_sequence(const MolGraph& g) {
  FragmentSet fs = fragment(g);
  fs.pair_fragments = pair_substructures(fs, g);
  std::vector<Fragment> seq = std::move(fs.brics_fragments);
  for (auto& p : fs.pair_fragments) seq.push_back(std::move(p));
  for (std::size_t i = 0; i < seq.size(); ++i)
    seq[i].order_key = static_cast<int>(i);
  return seq;
}

/// Full fragmentation: BRICS fragments, pairs and cleavage sites.
inline FragmentSet fragment_with_pairs(const MolGraph& g) {
  FragmentSet fs = fragment(g);
  fs.pair_fragments = pair_substructures(fs, g);
  const int base = static_cast<int>(fs.brics_fragments.size());
  for (std::size_t i = 0; i < fs.pair_fragments.size(); ++i)
    fs.pair_fragments[i].order_key = base + static_cast<int>(i);
  return fs;
}

/// The fragment as a standalone capped molecule.
inline MolGraph materialize(const Fragment& f, const MolGraph& parent) {
  return chem::induced_subgraph(parent, f.parent_atoms, f.cap_per_atom);
}

}  // namespace subdesc::brics

//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "subdesc/chem/molgraph.hpp"

namespace subdesc::chem {

namespace detail {

inline std::vector<int> dense_ranks(const std::vector<std::vector<long>>& keys) {
  std::vector<int> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return keys[a] < keys[b]; });
  std::vector<int> rank(keys.size());
  int r = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && keys[order[k]] != keys[order[k - 1]]) ++r;
    rank[order[k]] = r;
  }
  return rank;
}

inline int count_classes(const std::vector<int>& rank) {
  return rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end()) + 1;
}

// Iterated neighbourhood refinement until the partition is stable.
inline std::vector<int> refine(const MolGraph& g, std::vector<int> rank) {
  int classes = count_classes(rank);
  for (;;) {
    std::vector<std::vector<long>> keys(g.num_atoms());
    for (int i = 0; i < g.num_atoms(); ++i) {
      std::vector<long> nbr;
      for (auto nb : g.neighbors(i))
        nbr.push_back(static_cast<long>(rank[nb.atom]) * 8 +
                      static_cast<long>(g.bond(nb.bond).order));
      std::sort(nbr.begin(), nbr.end());
      keys[i].push_back(rank[i]);
      keys[i].insert(keys[i].end(), nbr.begin(), nbr.end());
    }
    auto next = dense_ranks(keys);
    int next_classes = count_classes(next);
    rank = std::move(next);
    if (next_classes == classes) return rank;
    classes = next_classes;
  }
}

}  // namespace detail

/// Canonical atom ranks (0 = first). Graph invariants are refined by
/// neighbourhood; remaining ties are broken one atom at a time.
inline std::vector<int> canonical_ranks(const MolGraph& g) {
  const int n = g.num_atoms();
  std::vector<std::vector<long>> init(n);
  for (int i = 0; i < n; ++i) {
    const Atom& a = g.atom(i);
    init[i] = {g.degree(i), atomic_number(a.element), a.aromatic ? 1 : 0,
               a.formal_charge, a.implicit_h, g.atom_in_ring(i) ? 1 : 0,
               g.valence_sum(i)};
  }
  auto rank = detail::refine(g, detail::dense_ranks(init));
  while (detail::count_classes(rank) < n) {
    // Lowest tied class; its first member is promoted ahead of the others.
    std::vector<int> size(n, 0);
    for (int r : rank) ++size[r];
    int tied = 0;
    while (size[tied] < 2) ++tied;
    int pick = -1;
    for (int i = 0; i < n && pick < 0; ++i)
      if (rank[i] == tied) pick = i;
    std::vector<std::vector<long>> keys(n);
    for (int i = 0; i < n; ++i)
      keys[i] = {2L * rank[i] + ((rank[i] == tied && i != pick) ? 1 : 0)};
    rank = detail::refine(g, detail::dense_ranks(keys));
  }
  return rank;
}

namespace detail {

inline bool organic_subset(Element e) {
  switch (e) {
    case Element::B: case Element::C: case Element::N: case Element::O:
    case Element::P: case Element::S: case Element::F: case Element::Cl:
    case Element::Br: case Element::I:
      return true;
    default:
      return false;
  }
}

// Hydrogen count the parser derives for an unbracketed atom.
inline int organic_hydrogens(const MolGraph& g, int i) {
  const Atom& a = g.atom(i);
  const int sum = g.valence_sum(i);
  const auto legal = legal_valences(a.element, 0);
  if (a.aromatic) return std::max(0, legal.front() - sum - 1);
  for (int v : legal)
    if (v >= sum) return v - sum;
  return -1;
}

inline int permutation_parity(const std::vector<int>& from,
                              const std::vector<int>& to) {
  std::vector<int> pos;
  for (int x : to) {
    auto it = std::find(from.begin(), from.end(), x);
    pos.push_back(static_cast<int>(it - from.begin()));
  }
  int inv = 0;
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j) inv += pos[i] > pos[j];
  return inv % 2;
}

class SmilesWriter {
 public:
  explicit SmilesWriter(const MolGraph& g) : g_(g), rank_(canonical_ranks(g)) {}

  std::string write() {
    const int n = g_.num_atoms();
    if (n == 0) return {};
    visited_.assign(n, false);
    closure_.assign(g_.num_bonds(), false);
    order_.assign(n, -1);
    parent_.assign(n, -1);

    int start = static_cast<int>(
        std::min_element(rank_.begin(), rank_.end()) - rank_.begin());
    int counter = 0;
    mark(start, -1, counter);

    visited_.assign(n, false);
    ring_digit_.assign(g_.num_bonds(), -1);
    std::string out;
    emit(start, -1, out);
    return out;
  }

 private:
  std::vector<Neighbor> ranked_neighbors(int v) const {
    auto nbs = g_.neighbors(v);
    std::vector<Neighbor> out(nbs.begin(), nbs.end());
    std::sort(out.begin(), out.end(), [&](Neighbor a, Neighbor b) {
      return rank_[a.atom] < rank_[b.atom];
    });
    return out;
  }

  void mark(int v, int from_bond, int& counter) {
    visited_[v] = true;
    order_[v] = counter++;
    for (auto nb : ranked_neighbors(v)) {
      if (nb.bond == from_bond) continue;
      if (visited_[nb.atom]) {
        closure_[nb.bond] = true;
        continue;
      }
      parent_[nb.atom] = v;
      mark(nb.atom, nb.bond, counter);
    }
  }

  std::string bond_symbol(int b) const {
    const Bond& bd = g_.bond(b);
    bool both_arom = g_.atom(bd.begin).aromatic && g_.atom(bd.end).aromatic;
    switch (bd.order) {
      case BondOrder::kSingle: return both_arom ? "-" : "";
      case BondOrder::kDouble: return "=";
      case BondOrder::kTriple: return "#";
      case BondOrder::kAromatic: return both_arom ? "" : ":";
    }
    return "";
  }

  std::string atom_text(int v, Chirality chir) const {
    const Atom& a = g_.atom(v);
    std::string sym(symbol(a.element));
    if (a.aromatic) sym[0] = static_cast<char>(std::tolower(sym[0]));
    if (organic_subset(a.element) && a.formal_charge == 0 &&
        chir == Chirality::kNone && organic_hydrogens(g_, v) == a.implicit_h)
      return sym;
    std::string s = "[" + sym;
    if (chir == Chirality::kCounterclockwise) s += "@";
    if (chir == Chirality::kClockwise) s += "@@";
    if (a.implicit_h > 0) {
      s += "H";
      if (a.implicit_h > 1) s += std::to_string(a.implicit_h);
    }
    if (a.formal_charge != 0) {
      s += a.formal_charge > 0 ? "+" : "-";
      int q = a.formal_charge > 0 ? a.formal_charge : -a.formal_charge;
      if (q > 1) s += std::to_string(q);
    }
    return s + "]";
  }

  int take_digit() {
    int d = 1;
    while (used_digits_.count(d)) ++d;
    used_digits_.insert({d, true});
    return d;
  }

  static std::string digit_text(int d) {
    return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
  }

  void emit(int v, int from_bond, std::string& out) {
    visited_[v] = true;
    std::vector<int> written;  // neighbour order as it appears in the text
    if (from_bond >= 0) written.push_back(g_.bond(from_bond).other(v));
    if (g_.atom(v).implicit_h == 1) written.push_back(kImplicitHydrogen);

    // Ring closures: ones closing here first, then ones opening here.
    std::vector<Neighbor> closing, opening, children;
    for (auto nb : ranked_neighbors(v)) {
      if (nb.bond == from_bond) continue;
      if (closure_[nb.bond]) {
        (ring_digit_[nb.bond] >= 0 ? closing : opening).push_back(nb);
      } else if (!visited_[nb.atom] && parent_[nb.atom] == v) {
        children.push_back(nb);
      }
    }
    std::sort(closing.begin(), closing.end(), [&](Neighbor a, Neighbor b) {
      return order_[a.atom] < order_[b.atom];
    });
    std::string rings;
    for (auto nb : closing) {
      int d = ring_digit_[nb.bond];
      used_digits_.erase(d);
      rings += digit_text(d);
      written.push_back(nb.atom);
    }
    for (auto nb : opening) {
      int d = take_digit();
      ring_digit_[nb.bond] = d;
      rings += bond_symbol(nb.bond) + digit_text(d);
      written.push_back(nb.atom);
    }
    for (auto nb : children) written.push_back(nb.atom);

    const Atom& a = g_.atom(v);
    Chirality chir = a.chirality;
    if (chir != Chirality::kNone &&
        permutation_parity(a.stereo_neighbors, written) == 1)
      chir = chir == Chirality::kClockwise ? Chirality::kCounterclockwise
                                           : Chirality::kClockwise;
    out += atom_text(v, chir);
    out += rings;
    for (std::size_t k = 0; k < children.size(); ++k) {
      const bool branch = k + 1 < children.size();
      if (branch) out += "(";
      out += bond_symbol(children[k].bond);
      emit(children[k].atom, children[k].bond, out);
      if (branch) out += ")";
    }
  }

  const MolGraph& g_;
  std::vector<int> rank_;
  std::vector<bool> visited_;
  std::vector<bool> closure_;
  std::vector<int> order_, parent_, ring_digit_;
  std::map<int, bool> used_digits_;
};

}  // namespace detail

/// Canonical SMILES. Isomorphic graphs (same elements, charges, hydrogens,
/// aromaticity and bond orders) produce the same string; the output
/// re-parses to an isomorphic graph.
inline std::string write_smiles(const MolGraph& g) {
  return detail::SmilesWriter(g).write();
}

}  // namespace subdesc::chem

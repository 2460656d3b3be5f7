//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subdesc/chem/element.hpp"
#include "subdesc/chem/rings.hpp"
#include "subdesc/error.hpp"

namespace subdesc::chem {

enum class BondOrder : std::uint8_t { kSingle, kDouble, kTriple, kAromatic };

enum class Chirality : std::uint8_t { kNone, kClockwise, kCounterclockwise };

/// Integer valence contribution; aromatic bonds count as 1 (the shared
/// pi electron is accounted per atom, see `valence_sum`).
inline constexpr int valence_of(BondOrder o) {
  switch (o) {
    case BondOrder::kSingle: return 1;
    case BondOrder::kDouble: return 2;
    case BondOrder::kTriple: return 3;
    case BondOrder::kAromatic: return 1;
  }
  return 1;
}

/// Marker for the implicit hydrogen in `Atom::stereo_neighbors`.
inline constexpr int kImplicitHydrogen = -1;

struct Atom {
  Element element = Element::C;
  int formal_charge = 0;
  int implicit_h = 0;
  bool aromatic = false;
  Chirality chirality = Chirality::kNone;
  int index = 0;
  // For chiral atoms: neighbor atom indices (and kImplicitHydrogen) in the
  // order the chirality tag refers to.
  std::vector<int> stereo_neighbors;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;
  bool in_ring = false;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

/// Attributed molecular graph over heavy atoms; hydrogens live in
/// `Atom::implicit_h`. Immutable once built.
class MolGraph {
 public:
  MolGraph() = default;

  /// Validates topology, derives adjacency, ring membership and the SSSR.
  static MolGraph build(std::vector<Atom> atoms, std::vector<Bond> bonds,
                        std::string source = {}) {
    MolGraph g;
    g.source_ = std::move(source);
    const int n = static_cast<int>(atoms.size());
    for (int i = 0; i < n; ++i) atoms[i].index = i;
    g.adj_.resize(n);
    std::vector<Edge> edges;
    edges.reserve(bonds.size());
    for (int b = 0; b < static_cast<int>(bonds.size()); ++b) {
      auto& bd = bonds[b];
      if (bd.begin == bd.end || bd.begin < 0 || bd.end < 0 || bd.begin >= n ||
          bd.end >= n)
        throw Error("invalid bond endpoints");
      for (auto nb : g.adj_[bd.begin])
        if (nb.atom == bd.end) throw Error("duplicate bond between atoms");
      g.adj_[bd.begin].push_back({bd.end, b});
      g.adj_[bd.end].push_back({bd.begin, b});
      edges.emplace_back(bd.begin, bd.end);
    }
    auto cyclic = cyclic_edges(n, edges);
    for (std::size_t b = 0; b < bonds.size(); ++b) bonds[b].in_ring = cyclic[b];
    g.rings_ = sssr(n, edges);
    g.atoms_ = std::move(atoms);
    g.bonds_ = std::move(bonds);
    return g;
  }

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const Atom& atom(int i) const { return atoms_[i]; }
  const Bond& bond(int i) const { return bonds_[i]; }
  const std::vector<std::vector<int>>& rings() const { return rings_; }
  const std::string& source() const { return source_; }

  std::span<const Neighbor> neighbors(int i) const { return adj_[i]; }

  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  std::optional<int> bond_between(int a, int b) const {
    for (auto nb : adj_[a])
      if (nb.atom == b) return nb.bond;
    return std::nullopt;
  }

  bool atom_in_ring(int i) const {
    for (auto nb : adj_[i])
      if (bonds_[nb.bond].in_ring) return true;
    return false;
  }

  /// Explicit bond-order sum (aromatic bonds count 1).
  int valence_sum(int i) const {
    int s = 0;
    for (auto nb : adj_[i]) s += valence_of(bonds_[nb.bond].order);
    return s;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<std::vector<int>> rings_;
  std::string source_;
};

/// Induced subgraph on `keep` (ascending parent indices). `extra_h[i]` is added
/// to the hydrogen count of the i-th kept atom. Ring membership and SSSR are
/// recomputed on the subgraph; aromatic flags are copied from the parent.
inline MolGraph induced_subgraph(const MolGraph& g, std::span<const int> keep,
                                 std::span<const int> extra_h = {}) {
  std::vector<int> remap(g.num_atoms(), -1);
  std::vector<Atom> atoms;
  atoms.reserve(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    remap[keep[k]] = static_cast<int>(k);
    Atom a = g.atom(keep[k]);
    if (!extra_h.empty()) a.implicit_h += extra_h[k];
    atoms.push_back(std::move(a));
  }
  std::vector<Bond> bonds;
  for (const auto& b : g.bonds())
    if (remap[b.begin] >= 0 && remap[b.end] >= 0)
      bonds.push_back({remap[b.begin], remap[b.end], b.order, false});
  for (auto& a : atoms) {
    if (a.chirality == Chirality::kNone) continue;
    bool intact = true;
    for (int& s : a.stereo_neighbors) {
      if (s == kImplicitHydrogen) continue;
      if (remap[s] < 0) intact = false;
      else s = remap[s];
    }
    // A stereo centre that lost a neighbour no longer has a defined tag.
    if (!intact) {
      a.chirality = Chirality::kNone;
      a.stereo_neighbors.clear();
    }
  }
  return MolGraph::build(std::move(atoms), std::move(bonds));
}

}  // namespace subdesc::chem

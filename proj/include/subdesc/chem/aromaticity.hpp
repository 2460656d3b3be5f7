//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <vector>

#include "subdesc/chem/molgraph.hpp"

namespace subdesc::chem {

namespace detail {

// Pi electrons `atom` contributes to `ring`, or nullopt when the atom cannot
// be sp2 in that ring.
inline std::optional<int> ring_pi_electrons(const MolGraph& g, int atom,
                                            const std::vector<bool>& in_ring) {
  const Atom& a = g.atom(atom);
  for (auto nb : g.neighbors(atom)) {
    const Bond& b = g.bond(nb.bond);
    if (b.order == BondOrder::kTriple) return std::nullopt;
    if (b.order == BondOrder::kDouble) {
      // Ring double bonds (this ring or a fused neighbour) donate one
      // electron; an exocyclic double bond leaves the atom empty.
      if (in_ring[nb.atom] || b.in_ring) return 1;
      return 0;
    }
  }
  const int charge = a.formal_charge;
  const int h = a.implicit_h;
  const int deg = g.degree(atom);
  switch (a.element) {
    case Element::C:
      if (charge == -1) return 2;
      if (charge == 1) return 0;
      if (a.aromatic) return 1;
      return std::nullopt;
    case Element::N:
    case Element::P:
      if (charge == 1) return a.aromatic ? std::optional<int>(1) : std::nullopt;
      if (charge == -1) return 2;
      if (a.aromatic) return (deg >= 3 || h >= 1) ? 2 : 1;
      if (g.valence_sum(atom) + h == 3) return 2;  // lone pair
      return std::nullopt;
    case Element::O:
    case Element::S:
    case Element::Se:
      if (charge == 1) return a.aromatic ? std::optional<int>(1) : std::nullopt;
      if (charge == 0 && deg == 2 && h == 0) return 2;
      return std::nullopt;
    case Element::B:
      if (charge == 0 && g.valence_sum(atom) + h <= 3) return 0;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

}  // namespace detail

/// Simplified Hueckel perception over SSSR rings: a ring is aromatic when
/// every member is sp2-capable and the ring holds 4n+2 pi electrons. Atoms
/// and bonds outside aromatic rings lose any aromatic flag (aromatic bonds
/// there become single).
inline MolGraph perceive_aromaticity(const MolGraph& g) {
  const int n = g.num_atoms();
  std::vector<bool> atom_arom(n, false);
  std::vector<bool> bond_arom(g.num_bonds(), false);
  std::vector<bool> in_ring(n, false);

  for (const auto& ring : g.rings()) {
    for (int a : ring) in_ring[a] = true;
    int electrons = 0;
    bool ok = true;
    for (int a : ring) {
      auto pi = detail::ring_pi_electrons(g, a, in_ring);
      if (!pi) {
        ok = false;
        break;
      }
      electrons += *pi;
    }
    if (ok && electrons % 4 == 2) {
      for (std::size_t k = 0; k < ring.size(); ++k) {
        atom_arom[ring[k]] = true;
        auto b = g.bond_between(ring[k], ring[(k + 1) % ring.size()]);
        bond_arom[*b] = true;
      }
    }
    for (int a : ring) in_ring[a] = false;
  }

  std::vector<Atom> atoms = g.atoms();
  std::vector<Bond> bonds = g.bonds();
  for (int i = 0; i < n; ++i) atoms[i].aromatic = atom_arom[i];
  for (int b = 0; b < g.num_bonds(); ++b) {
    if (bond_arom[b])
      bonds[b].order = BondOrder::kAromatic;
    else if (bonds[b].order == BondOrder::kAromatic)
      bonds[b].order = BondOrder::kSingle;
  }
  return MolGraph::build(std::move(atoms), std::move(bonds), g.source());
}

}  // namespace subdesc::chem

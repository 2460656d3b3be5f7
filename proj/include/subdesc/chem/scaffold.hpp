//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "subdesc/chem/molgraph.hpp"

namespace subdesc::chem {

/// Bemis-Murcko scaffold: ring systems plus the linkers between them.
/// Side-chain atoms (iteratively, any non-ring atom of degree 1) are removed;
/// the atoms they were attached to take hydrogens for the lost bond orders.
/// Chirality is dropped. Acyclic molecules give an empty graph.
inline MolGraph murcko_scaffold(const MolGraph& g) {
  const int n = g.num_atoms();
  if (g.rings().empty()) return MolGraph{};

  std::vector<bool> removed(n, false);
  std::vector<int> degree(n);
  for (int i = 0; i < n; ++i) degree[i] = g.degree(i);
  std::vector<int> todo;
  for (int i = 0; i < n; ++i)
    if (degree[i] <= 1 && !g.atom_in_ring(i)) todo.push_back(i);
  while (!todo.empty()) {
    int i = todo.back();
    todo.pop_back();
    if (removed[i]) continue;
    removed[i] = true;
    for (auto nb : g.neighbors(i)) {
      if (removed[nb.atom]) continue;
      if (--degree[nb.atom] <= 1 && !g.atom_in_ring(nb.atom))
        todo.push_back(nb.atom);
    }
  }

  std::vector<int> keep, extra_h;
  for (int i = 0; i < n; ++i) {
    if (removed[i]) continue;
    int lost = 0;
    for (auto nb : g.neighbors(i))
      if (removed[nb.atom]) lost += valence_of(g.bond(nb.bond).order);
    keep.push_back(i);
    extra_h.push_back(lost);
  }
  MolGraph sub = induced_subgraph(g, keep, extra_h);
  std::vector<Atom> atoms = sub.atoms();
  for (auto& a : atoms) {
    a.chirality = Chirality::kNone;
    a.stereo_neighbors.clear();
  }
  return MolGraph::build(std::move(atoms), sub.bonds());
}

}  // namespace subdesc::chem

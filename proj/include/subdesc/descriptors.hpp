//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "subdesc/brics.hpp"
#include "subdesc/chem/molgraph.hpp"
#include "subdesc/chem/paths.hpp"
#include "subdesc/error.hpp"
#include "subdesc/logp_table.hpp"

namespace subdesc::descriptors {

using chem::Element;
using chem::MolGraph;

inline constexpr std::size_t kDescriptorSize = 23;

/// Slot layout of a descriptor vector.
namespace slot {
inline constexpr std::size_t kCarbon = 0;
inline constexpr std::size_t kHydrogen = 1;
inline constexpr std::size_t kMetals = 11;
inline constexpr std::size_t kTotalAtoms = 12;
inline constexpr std::size_t kSingle = 13;
inline constexpr std::size_t kDouble = 14;
inline constexpr std::size_t kTriple = 15;
inline constexpr std::size_t kAromatic = 16;
inline constexpr std::size_t kTotalBonds = 17;
inline constexpr std::size_t kWiener = 18;
inline constexpr std::size_t kLogP = 19;
inline constexpr std::size_t kUff = 20;
inline constexpr std::size_t kRingAtoms = 21;
inline constexpr std::size_t kRings = 22;
}  // namespace slot

/// Elements counted individually in slots 0..10, in slot order.
inline constexpr std::array<Element, 11> kCountedElements{
    Element::C,  Element::H,  Element::O, Element::N,  Element::S, Element::P,
    Element::F,  Element::Cl, Element::Br, Element::I, Element::Si};

using DescriptorVector = std::array<int, kDescriptorSize>;

/// Column names of the 23 slots, in slot order.
inline constexpr std::array<std::string_view, kDescriptorSize> kSlotNames{
    "n_c",      "n_h",      "n_o",       "n_n",        "n_s",      "n_p",
    "n_f",      "n_cl",     "n_br",      "n_i",        "n_si",     "n_metal",
    "n_atoms",  "n_single", "n_double",  "n_triple",   "n_aromatic", "n_bonds",
    "wiener",   "logp_bin", "uff_bin",   "ring_atoms", "rings"};

/// Per-slot maximum values.
struct CapTable {
  std::array<int, kDescriptorSize> max{};

  static CapTable defaults() {
    CapTable c;
    for (std::size_t j = 0; j <= 11; ++j) c.max[j] = 60;
    c.max[slot::kHydrogen] = 120;
    c.max[slot::kTotalAtoms] = 200;
    for (std::size_t j = slot::kSingle; j <= slot::kAromatic; ++j) c.max[j] = 120;
    c.max[slot::kTotalBonds] = 200;
    c.max[slot::kWiener] = 255;
    c.max[slot::kLogP] = 7;
    c.max[slot::kUff] = 7;
    c.max[slot::kRingAtoms] = 30;
    c.max[slot::kRings] = 30;
    return c;
  }

  static CapTable uniform(int value) {
    CapTable c;
    c.max.fill(value);
    return c;
  }

  /// Throws `DomainError` unless every cap is positive.
  void validate() const {
    for (int v : max)
      if (v < 1) throw DomainError("cap table entries must be >= 1");
  }

  /// Stricter check for tables used to build descriptor vectors: the two
  /// category slots must span all seven bins.
  void validate_for_descriptors() const {
    validate();
    if (max[slot::kLogP] != 7 || max[slot::kUff] != 7)
      throw DomainError("category slots 19 and 20 must have cap 7");
  }

  bool operator==(const CapTable&) const = default;
};

/// Counts slot clipping events across calls.
struct ClipCounter {
  std::size_t clipped_values = 0;
  std::array<std::size_t, kDescriptorSize> per_slot{};
};

/// Externally supplied property values for a fragment.
struct PropertyOverride {
  double logp = 0.0;
  double uff_energy = 0.0;
};

inline int hydrogen_count(const MolGraph& g) {
  int h = 0;
  for (const auto& a : g.atoms()) h += a.implicit_h;
  return h;
}

/// Slots 0..12: element counts (hydrogens include caps), metals, total.
inline std::array<int, 13> atom_composition(const MolGraph& g) {
  std::array<int, 13> out{};
  for (const auto& a : g.atoms()) {
    for (std::size_t k = 0; k < kCountedElements.size(); ++k)
      if (kCountedElements[k] == a.element) ++out[k];
    if (chem::is_metal(a.element)) ++out[slot::kMetals];
  }
  const int h = hydrogen_count(g);
  out[slot::kHydrogen] += h;
  out[slot::kTotalAtoms] = g.num_atoms() + h;
  return out;
}

/// Slots 13..17: single/double/triple/aromatic/total bond counts. Bonds to
/// hydrogens count as single.
inline std::array<int, 5> bond_profile(const MolGraph& g) {
  std::array<int, 5> out{};
  for (const auto& b : g.bonds()) ++out[static_cast<std::size_t>(b.order)];
  out[0] += hydrogen_count(g);
  out[4] = out[0] + out[1] + out[2] + out[3];
  return out;
}

/// Sum of shortest-path distances over unordered heavy-atom pairs.
inline long wiener_index(const MolGraph& g) {
  const auto spd = chem::shortest_path_matrix(g);
  long w = 0;
  for (int i = 0; i < g.num_atoms(); ++i)
    for (int j = i + 1; j < g.num_atoms(); ++j)
      if (spd.reachable(i, j)) w += spd(i, j);
  return w;
}

/// Atom-contribution logP from the reduced table in logp_table.hpp.
inline double logp_value(const MolGraph& g) {
  double total = 0.0;
  for (int i = 0; i < g.num_atoms(); ++i) {
    const auto& a = g.atom(i);
    int hetero = 0;
    for (auto nb : g.neighbors(i)) {
      Element e = g.atom(nb.atom).element;
      if (e != Element::C && e != Element::H) ++hetero;
    }
    const auto c = heavy_contribution(a.element);
    const auto& row = a.aromatic ? c.aromatic : c.aliphatic;
    total += row[static_cast<std::size_t>(std::min(hetero, 2))];
    total += a.implicit_h * hydrogen_contribution(a.element, a.aromatic);
    if (a.formal_charge != 0) total += kChargedAtomContribution;
  }
  return total;
}

/// Seven hydrophobicity bins; lower bounds inclusive.
inline int logp_category(double x) {
  if (std::isnan(x)) throw DomainError("logP is NaN");
  if (x < -2.0) return 1;
  if (x < -0.5) return 2;
  if (x < 0.0) return 3;
  if (x < 1.0) return 4;
  if (x < 2.0) return 5;
  if (x < 4.0) return 6;
  return 7;
}

/// Deterministic 2D strain proxy standing in for a force-field energy:
/// ring strain per SSSR ring (3: 27, 4: 26, 5: 6, 6: 0, 7+: 6), plus 10 per
/// atom with four or more heavy neighbours, plus 2 per acyclic single bond.
inline double strain_proxy(const MolGraph& g) {
  double e = 0.0;
  for (const auto& ring : g.rings()) {
    switch (ring.size()) {
      case 3: e += 27.0; break;
      case 4: e += 26.0; break;
      case 5: e += 6.0; break;
      case 6: break;
      default: e += 6.0; break;
    }
  }
  for (int i = 0; i < g.num_atoms(); ++i)
    if (g.degree(i) >= 4) e += 10.0;
  for (const auto& b : g.bonds())
    if (!b.in_ring && b.order == chem::BondOrder::kSingle) e += 2.0;
  return e;
}

/// Seven energy bins (kcal/mol); lower bounds inclusive.
inline int uff_category(double e) {
  if (std::isnan(e)) throw DomainError("energy is NaN");
  if (e < 0.0) return 1;
  if (e < 50.0) return 2;
  if (e < 100.0) return 3;
  if (e < 150.0) return 4;
  if (e < 200.0) return 5;
  if (e < 300.0) return 6;
  return 7;
}

/// Slots 21..22: atoms on at least one ring, SSSR ring count.
inline std::array<int, 2> ring_descriptors(const MolGraph& g) {
  std::vector<bool> on_ring(g.num_atoms(), false);
  for (const auto& ring : g.rings())
    for (int a : ring) on_ring[a] = true;
  int atoms = 0;
  for (bool b : on_ring) atoms += b;
  return {atoms, static_cast<int>(g.rings().size())};
}

/// Assembles all 23 slots, clipping each to `caps`. Clipped slots are
/// tallied in `clips` when given. `props` replaces the built-in logP and
/// strain values.
inline DescriptorVector descriptor_vector(
    const MolGraph& g, const CapTable& caps = CapTable::defaults(),
    ClipCounter* clips = nullptr, const PropertyOverride* props = nullptr) {
  DescriptorVector d{};
  std::array<long, kDescriptorSize> raw{};
  const auto comp = atom_composition(g);
  for (std::size_t j = 0; j < comp.size(); ++j) raw[j] = comp[j];
  const auto bonds = bond_profile(g);
  for (std::size_t j = 0; j < bonds.size(); ++j) raw[slot::kSingle + j] = bonds[j];
  raw[slot::kWiener] = wiener_index(g);
  raw[slot::kLogP] = logp_category(props ? props->logp : logp_value(g));
  raw[slot::kUff] = uff_category(props ? props->uff_energy : strain_proxy(g));
  const auto rings = ring_descriptors(g);
  raw[slot::kRingAtoms] = rings[0];
  raw[slot::kRings] = rings[1];

  for (std::size_t j = 0; j < kDescriptorSize; ++j) {
    if (raw[j] > caps.max[j]) {
      d[j] = caps.max[j];
      if (clips) {
        ++clips->clipped_values;
        ++clips->per_slot[j];
      }
    } else {
      d[j] = static_cast<int>(raw[j]);
    }
  }
  return d;
}

/// Descriptor vector of a fragment of `parent`.
inline DescriptorVector descriptor_vector(
    const brics::Fragment& f, const MolGraph& parent,
    const CapTable& caps = CapTable::defaults(), ClipCounter* clips = nullptr) {
  return descriptor_vector(brics::materialize(f, parent), caps, clips);
}

}  // namespace subdesc::descriptors

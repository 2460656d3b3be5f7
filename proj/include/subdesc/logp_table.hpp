//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>

#include "subdesc/chem/element.hpp"

namespace subdesc::descriptors {

/// Reduced atom-contribution logP table.
///
/// Heavy atoms are typed by element, aromaticity and the number of
/// heteroatom (non C, non H) neighbours, bucketed as 0, 1, 2+. Hydrogens are
/// typed by the atom carrying them. Values follow the magnitudes of the
/// Wildman-Crippen classes after collapsing them onto these keys. Bump
/// `kLogPTableVersion` whenever a value changes: tokenized corpora depend
/// on it through the logP category slot.
inline constexpr int kLogPTableVersion = 1;

struct HeavyContribution {
  std::array<double, 3> aliphatic;  // by heteroatom-neighbour bucket
  std::array<double, 3> aromatic;
};

inline constexpr HeavyContribution heavy_contribution(chem::Element e) {
  using chem::Element;
  switch (e) {
    case Element::C:  return {{0.30, -0.10, -0.25}, {0.22, 0.05, -0.05}};
    case Element::N:  return {{-0.75, -0.60, -0.50}, {-0.50, -0.45, -0.40}};
    case Element::O:  return {{-0.45, -0.30, -0.25}, {0.05, 0.05, 0.05}};
    case Element::S:  return {{0.45, 0.30, 0.20}, {0.55, 0.50, 0.45}};
    case Element::P:  return {{0.20, 0.10, 0.00}, {0.20, 0.10, 0.00}};
    case Element::Se: return {{0.55, 0.45, 0.35}, {0.60, 0.55, 0.50}};
    case Element::B:  return {{-0.20, -0.25, -0.30}, {-0.20, -0.25, -0.30}};
    case Element::Si: return {{0.35, 0.25, 0.15}, {0.35, 0.25, 0.15}};
    case Element::Sn: return {{0.40, 0.30, 0.20}, {0.40, 0.30, 0.20}};
    case Element::F:  return {{0.40, 0.40, 0.40}, {0.40, 0.40, 0.40}};
    case Element::Cl: return {{0.65, 0.65, 0.65}, {0.65, 0.65, 0.65}};
    case Element::Br: return {{0.85, 0.85, 0.85}, {0.85, 0.85, 0.85}};
    case Element::I:  return {{1.05, 1.05, 1.05}, {1.05, 1.05, 1.05}};
    case Element::Na:
    case Element::K:  return {{-1.50, -1.50, -1.50}, {-1.50, -1.50, -1.50}};
    case Element::Mg:
    case Element::Fe:
    case Element::Zn: return {{-1.00, -1.00, -1.00}, {-1.00, -1.00, -1.00}};
    case Element::H:  return {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  }
  return {};
}

/// Hydrogen contribution keyed by its carrier.
inline constexpr double hydrogen_contribution(chem::Element carrier,
                                              bool carrier_aromatic) {
  using chem::Element;
  if (carrier == Element::C) return carrier_aromatic ? 0.13 : 0.15;
  if (carrier == Element::N || carrier == Element::O) return -0.15;
  return 0.0;
}

/// Added once per atom carrying a non-zero formal charge.
inline constexpr double kChargedAtomContribution = -1.0;

}  // namespace subdesc::descriptors

//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace subdesc::chem {

enum class Element : std::uint8_t {
  H, B, C, N, O, F, Na, Mg, Si, P, S, Cl, K, Fe, Zn, Se, Br, Sn, I,
};

inline constexpr std::size_t kElementCount = 19;

struct ElementInfo {
  Element element;
  std::string_view symbol;
  int atomic_number;
  // Neutral valences in ascending order; empty trailing entries are zero.
  std::array<int, 3> valences;
  bool metal;
};

// clang-format off
inline constexpr std::array<ElementInfo, kElementCount> kElements{{
    {Element::H,  "H",   1, {1, 0, 0}, false},
    {Element::B,  "B",   5, {3, 0, 0}, false},
    {Element::C,  "C",   6, {4, 0, 0}, false},
    {Element::N,  "N",   7, {3, 5, 0}, false},
    {Element::O,  "O",   8, {2, 0, 0}, false},
    {Element::F,  "F",   9, {1, 0, 0}, false},
    {Element::Na, "Na", 11, {1, 0, 0}, true},
    {Element::Mg, "Mg", 12, {2, 0, 0}, true},
    {Element::Si, "Si", 14, {4, 0, 0}, false},
    {Element::P,  "P",  15, {3, 5, 0}, false},
    {Element::S,  "S",  16, {2, 4, 6}, false},
    {Element::Cl, "Cl", 17, {1, 0, 0}, false},
    {Element::K,  "K",  19, {1, 0, 0}, true},
    {Element::Fe, "Fe", 26, {2, 3, 0}, true},
    {Element::Zn, "Zn", 30, {2, 0, 0}, true},
    {Element::Se, "Se", 34, {2, 4, 6}, false},
    {Element::Br, "Br", 35, {1, 0, 0}, false},
    {Element::Sn, "Sn", 50, {2, 4, 0}, false},
    {Element::I,  "I",  53, {1, 0, 0}, false},
}};
// clang-format on

inline constexpr const ElementInfo& info(Element e) {
  return kElements[static_cast<std::size_t>(e)];
}

inline constexpr std::string_view symbol(Element e) { return info(e).symbol; }

inline constexpr int atomic_number(Element e) { return info(e).atomic_number; }

inline constexpr bool is_metal(Element e) { return info(e).metal; }

inline std::optional<Element> element_from_symbol(std::string_view sym) {
  for (const auto& ei : kElements)
    if (ei.symbol == sym) return ei.element;
  return std::nullopt;
}

/// Dense index of an element in `kElements`; used as a dictionary id.
inline constexpr std::size_t element_index(Element e) {
  return static_cast<std::size_t>(e);
}

// Electron-rich main-group elements gain valence with positive charge
// (N+ is tetravalent); the rest lose valence with any charge.
inline constexpr bool valence_grows_with_charge(Element e) {
  switch (e) {
    case Element::N: case Element::P: case Element::O: case Element::S:
    case Element::Se: case Element::F: case Element::Cl: case Element::Br:
    case Element::I:
      return true;
    default:
      return false;
  }
}

/// Legal total valences (bond orders + hydrogens) for an element at the
/// given formal charge, ascending.
inline std::vector<int> legal_valences(Element e, int charge) {
  std::vector<int> out;
  for (int v : info(e).valences) {
    if (v == 0) continue;
    int adj;
    if (valence_grows_with_charge(e))
      adj = v + charge;
    else if (e == Element::B)
      adj = v - charge;  // borate anions are tetravalent
    else
      adj = v - (charge < 0 ? -charge : charge);
    if (adj >= 0 && (out.empty() || out.back() < adj)) out.push_back(adj);
  }
  if (out.empty()) out.push_back(0);
  return out;
}

inline int max_valence(Element e, int charge) {
  return legal_valences(e, charge).back();
}

}  // namespace subdesc::chem

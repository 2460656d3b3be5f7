//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "subdesc/chem/element.hpp"
#include "subdesc/chem/molgraph.hpp"
#include "subdesc/chem/paths.hpp"
#include "subdesc/error.hpp"
#include "subdesc/random.hpp"

namespace subdesc::graphprep {

/// Attribute dictionaries. Bump the version whenever an id changes.
inline constexpr int kDictionaryVersion = 1;

// Atom ids are element indices (0..18); 19 is the mask id.
inline constexpr int kAtomVocab = static_cast<int>(chem::kElementCount) + 1;
inline constexpr int kAtomMask = kAtomVocab - 1;

// none, clockwise, counterclockwise, mask
inline constexpr int kChiralityVocab = 4;
inline constexpr int kChiralityMask = 3;

// single, double, triple, aromatic, mask
inline constexpr int kBondVocab = 5;
inline constexpr int kBondMask = 4;

struct NodeAttr {
  int atom = 0;
  int chirality = 0;

  bool operator==(const NodeAttr&) const = default;
};

/// Heavy-atom graph with dictionary-encoded attributes. `edges[k]` is the
/// undirected pair (i, j), i < j, with attribute `edge_attrs[k]`.
struct GraphFeatures {
  std::vector<NodeAttr> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> edge_attrs;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  /// Both orientations of every edge.
  std::vector<std::pair<int, int>> directed_edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edges.size() * 2);
    for (auto [i, j] : edges) {
      out.emplace_back(i, j);
      out.emplace_back(j, i);
    }
    return out;
  }

  bool operator==(const GraphFeatures&) const = default;
};

struct GraphView {
  GraphFeatures features;
  std::vector<std::uint8_t> node_mask;
  std::vector<std::uint8_t> edge_mask;

  bool operator==(const GraphView&) const = default;
};

enum class AugmentPolicy { kGcnGin, kGraphormer };

struct StructuralEncodings {
  std::vector<int> degree;
  chem::SPDMatrix spd;
  std::vector<double> spatial;  // n x n, row-major

  double spatial_at(int u, int v) const {
    return spatial[static_cast<std::size_t>(u) * spd.size() + v];
  }
};

inline int atom_id(chem::Element e) { return static_cast<int>(chem::element_index(e)); }

inline int chirality_id(chem::Chirality c) { return static_cast<int>(c); }

inline int bond_id(chem::BondOrder o) { return static_cast<int>(o); }

inline GraphFeatures featurize(const chem::MolGraph& g) {
  GraphFeatures f;
  f.nodes.reserve(g.num_atoms());
  for (const auto& a : g.atoms()) {
    NodeAttr n{atom_id(a.element), chirality_id(a.chirality)};
    if (n.atom < 0 || n.atom >= kAtomMask || n.chirality < 0 ||
        n.chirality >= kChiralityMask)
      throw DomainError("atom attribute outside dictionary");
    f.nodes.push_back(n);
  }
  for (const auto& b : g.bonds()) {
    const int id = bond_id(b.order);
    if (id < 0 || id >= kBondMask) throw DomainError("bond attribute outside dictionary");
    f.edges.emplace_back(std::min(b.begin, b.end), std::max(b.begin, b.end));
    f.edge_attrs.push_back(id);
  }
  return f;
}

/// round(0.2 * n) half up, at least one for a nonempty set.
inline int masked_attribute_count(int n) {
  if (n <= 0) return 0;
  return std::max(1, static_cast<int>(std::floor(0.2 * n + 0.5)));
}

namespace detail {

inline std::vector<std::uint8_t> draw_mask(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::uint8_t> mask(n, 0);
  for (int i = 0; i < k; ++i) mask[idx[i]] = 1;
  return mask;
}

}  // namespace detail

/// One masked view, drawn from `rng`.
inline GraphView make_view(const GraphFeatures& gf, AugmentPolicy policy, Rng& rng) {
  GraphView v;
  v.features = gf;
  v.node_mask = detail::draw_mask(gf.num_nodes(), masked_attribute_count(gf.num_nodes()), rng);
  for (int i = 0; i < gf.num_nodes(); ++i)
    if (v.node_mask[i]) v.features.nodes[i] = {kAtomMask, kChiralityMask};
  if (policy == AugmentPolicy::kGraphormer) {
    v.edge_mask = detail::draw_mask(gf.num_edges(), masked_attribute_count(gf.num_edges()), rng);
    for (int k = 0; k < gf.num_edges(); ++k)
      if (v.edge_mask[k]) v.features.edge_attrs[k] = kBondMask;
  } else {
    v.edge_mask.assign(gf.num_edges(), 0);
  }
  return v;
}

/// Two independently drawn views; view k uses stream (seed, k).
inline std::array<GraphView, 2> augment(const GraphFeatures& gf, AugmentPolicy policy,
                                        std::uint64_t seed) {
  std::array<GraphView, 2> out;
  for (std::uint64_t k = 0; k < 2; ++k) {
    Rng rng(derive_seed(seed, {k}));
    out[k] = make_view(gf, policy, rng);
  }
  return out;
}

inline StructuralEncodings structural_encodings(const chem::MolGraph& g) {
  StructuralEncodings s;
  const int n = g.num_atoms();
  s.degree.resize(n);
  for (int i = 0; i < n; ++i) s.degree[i] = g.degree(i);
  s.spd = chem::shortest_path_matrix(g);
  s.spatial.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (s.spd.reachable(u, v))
        s.spatial[static_cast<std::size_t>(u) * n + v] = 1.0 / (s.spd(u, v) + 1.0);
  return s;
}

}  // namespace subdesc::graphprep

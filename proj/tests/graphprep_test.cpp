//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "subdesc/chem/smiles_parser.hpp"
#include "subdesc/graphprep.hpp"
#include "support/oracles.hpp"

namespace {

using namespace subdesc;
using namespace subdesc::graphprep;

int count_set(const std::vector<std::uint8_t>& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

GraphFeatures path_graph(int n) {
  GraphFeatures gf;
  gf.nodes.assign(n, NodeAttr{atom_id(chem::Element::C), 0});
  for (int i = 0; i + 1 < n; ++i) {
    gf.edges.emplace_back(i, i + 1);
    gf.edge_attrs.push_back(0);
  }
  return gf;
}

bool connected(const GraphFeatures& gf) {
  if (gf.num_nodes() == 0) return true;
  std::vector<std::vector<int>> adj(gf.num_nodes());
  for (auto [i, j] : gf.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<bool> seen(gf.num_nodes(), false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  int visited = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    ++visited;
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
  }
  return visited == gf.num_nodes();
}

TEST(Featurize, Ethane) {
  const auto gf = featurize(chem::parse_smiles("CC"));
  ASSERT_EQ(gf.num_nodes(), 2);
  EXPECT_EQ(gf.nodes[0], (NodeAttr{atom_id(chem::Element::C), 0}));
  ASSERT_EQ(gf.num_edges(), 1);
  EXPECT_EQ(gf.edge_attrs[0], bond_id(chem::BondOrder::kSingle));
  EXPECT_EQ(gf.directed_edges().size(), 2u);
}

TEST(Featurize, Benzene) {
  const auto gf = featurize(chem::parse_smiles("c1ccccc1"));
  EXPECT_EQ(gf.num_nodes(), 6);
  ASSERT_EQ(gf.num_edges(), 6);
  for (int a : gf.edge_attrs) EXPECT_EQ(a, 3);
}

TEST(Featurize, ChiralCenter) {
  const auto gf = featurize(chem::parse_smiles("[C@H](N)(O)C"));
  EXPECT_EQ(gf.nodes[0].chirality, 2);
  EXPECT_EQ(gf.nodes[1].chirality, 0);
  EXPECT_EQ(featurize(chem::parse_smiles("[C@@H](N)(O)C")).nodes[0].chirality, 1);
}

TEST(Featurize, MaskIdsAreOutsideRealRange) {
  EXPECT_EQ(kAtomMask, static_cast<int>(chem::kElementCount));
  for (std::size_t i = 0; i < chem::kElementCount; ++i)
    EXPECT_NE(atom_id(chem::kElements[i].element), kAtomMask);
  EXPECT_EQ(bond_id(chem::BondOrder::kAromatic) + 1, kBondMask);
  EXPECT_EQ(chirality_id(chem::Chirality::kCounterclockwise) + 1, kChiralityMask);
}

TEST(MaskedCount, RoundHalfUpWithFloor) {
  EXPECT_EQ(masked_attribute_count(0), 0);
  EXPECT_EQ(masked_attribute_count(1), 1);
  EXPECT_EQ(masked_attribute_count(2), 1);
  EXPECT_EQ(masked_attribute_count(10), 2);
  EXPECT_EQ(masked_attribute_count(12), 2);
  EXPECT_EQ(masked_attribute_count(13), 3);
  EXPECT_EQ(masked_attribute_count(22), 4);
  EXPECT_EQ(masked_attribute_count(23), 5);
  for (int n = 1; n <= 200; ++n) {
    // Integer form of floor(n/5 + 1/2).
    const int expected = std::max(1, (2 * n + 5) / 10);
    EXPECT_EQ(masked_attribute_count(n), expected) << n;
  }
}

TEST(Augment, TenNodeGraphMasksTwoPerView) {
  const auto views = augment(path_graph(10), AugmentPolicy::kGcnGin, 3);
  for (const auto& v : views) {
    EXPECT_EQ(count_set(v.node_mask), 2);
    EXPECT_EQ(count_set(v.edge_mask), 0);
  }
}

TEST(Augment, SingleNodeIsMasked) {
  const auto views = augment(featurize(chem::parse_smiles("C")), AugmentPolicy::kGcnGin, 1);
  for (const auto& v : views) {
    EXPECT_EQ(v.node_mask, std::vector<std::uint8_t>{1});
    EXPECT_EQ(v.features.nodes[0], (NodeAttr{kAtomMask, kChiralityMask}));
  }
}

TEST(Augment, GraphormerAlsoMasksEdges) {
  const auto gf = path_graph(12);
  const auto views = augment(gf, AugmentPolicy::kGraphormer, 5);
  for (const auto& v : views) {
    EXPECT_EQ(count_set(v.node_mask), 2);
    EXPECT_EQ(count_set(v.edge_mask), 2);
    for (int k = 0; k < gf.num_edges(); ++k)
      EXPECT_EQ(v.features.edge_attrs[k], v.edge_mask[k] ? kBondMask : gf.edge_attrs[k]);
  }
}

TEST(Augment, OctylFormateKeepsEveryBond) {
  // Deleting the bond between the alkyl chain and the ester would leave
  // heptane and methyl formate; masking must only hide attributes.
  const auto gf = featurize(chem::parse_smiles("CCCCCCCCOC=O"));
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    for (const auto& v : augment(gf, AugmentPolicy::kGraphormer, seed)) {
      EXPECT_EQ(v.features.edges, gf.edges);
      EXPECT_TRUE(connected(v.features));
    }
}

TEST(Augment, ViewsKeepTopologyOnCorpus) {
  const auto smiles = oracle::read_lines(oracle::fixture("corpus200.smi"));
  std::uint64_t seed = 0;
  for (const auto& s : smiles) {
    const auto gf = featurize(chem::parse_smiles(s));
    for (auto policy : {AugmentPolicy::kGcnGin, AugmentPolicy::kGraphormer}) {
      const auto views = augment(gf, policy, ++seed);
      for (const auto& v : views) {
        ASSERT_EQ(v.features.num_nodes(), gf.num_nodes());
        ASSERT_EQ(v.features.edges, gf.edges);
        EXPECT_EQ(count_set(v.node_mask), masked_attribute_count(gf.num_nodes()));
        const NodeAttr masked{kAtomMask, kChiralityMask};
        for (int i = 0; i < gf.num_nodes(); ++i)
          EXPECT_EQ(v.features.nodes[i], v.node_mask[i] ? masked : gf.nodes[i]);
      }
      EXPECT_EQ(augment(gf, policy, seed), views);
    }
  }
}

TEST(Augment, ViewsAreDrawnIndependently) {
  // With 40 nodes and 8 masked, two independent draws coincide rarely;
  // most of 50 seeded pairs must differ.
  const auto gf = path_graph(40);
  int differing = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto v = augment(gf, AugmentPolicy::kGcnGin, seed);
    differing += v[0].node_mask != v[1].node_mask;
  }
  EXPECT_GT(differing, 40);
}

TEST(StructuralEncodings, Examples) {
  const auto s = structural_encodings(chem::parse_smiles("CCCC"));
  EXPECT_EQ(s.degree, (std::vector<int>{1, 2, 2, 1}));
  EXPECT_DOUBLE_EQ(s.spatial_at(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.spatial_at(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(s.spatial_at(0, 3), 0.25);
}

TEST(StructuralEncodings, SpatialPropertiesOnCorpus) {
  for (const auto& smi : oracle::read_lines(oracle::fixture("corpus200.smi"))) {
    const auto g = chem::parse_smiles(smi);
    const auto s = structural_encodings(g);
    const auto fw = oracle::floyd_warshall(g);
    const int n = g.num_atoms();
    bool symmetric = true, matches = true, monotone = true;
    for (int u = 0; u < n; ++u) {
      EXPECT_EQ(s.degree[u], g.degree(u));
      EXPECT_DOUBLE_EQ(s.spatial_at(u, u), 1.0);
      for (int v = 0; v < n; ++v) {
        symmetric &= s.spatial_at(u, v) == s.spatial_at(v, u);
        matches &= s.spatial_at(u, v) == 1.0 / (fw[u][v] + 1.0);
        for (int w = 0; w < n; ++w)
          if (fw[u][v] <= fw[u][w]) monotone &= s.spatial_at(u, v) >= s.spatial_at(u, w);
      }
    }
    EXPECT_TRUE(symmetric) << smi;
    EXPECT_TRUE(matches) << smi;
    EXPECT_TRUE(monotone) << smi;
  }
}

}  // namespace

//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

#include "subdesc/chem/smiles_parser.hpp"
#include "subdesc/descriptors.hpp"
#include "support/oracles.hpp"

namespace {

using namespace subdesc;
using namespace subdesc::descriptors;
using chem::parse_smiles;

TEST(AtomComposition, Examples) {
  auto m = atom_composition(parse_smiles("C"));
  EXPECT_EQ(m[slot::kCarbon], 1);
  EXPECT_EQ(m[slot::kHydrogen], 4);
  EXPECT_EQ(m[slot::kTotalAtoms], 5);

  auto g = parse_smiles("CN");
  auto fs = brics::fragment(g);
  auto n = atom_composition(brics::materialize(fs.brics_fragments[1], g));
  EXPECT_EQ(n[3], 1);
  EXPECT_EQ(n[slot::kHydrogen], 3);

  auto na = atom_composition(parse_smiles("[Na+]"));
  EXPECT_EQ(na[slot::kMetals], 1);
  for (std::size_t j = 0; j < 11; ++j) EXPECT_EQ(na[j], 0);
}

TEST(BondProfile, Examples) {
  EXPECT_EQ(bond_profile(parse_smiles("C")), (std::array<int, 5>{4, 0, 0, 0, 4}));
  EXPECT_EQ(bond_profile(parse_smiles("c1ccccc1")),
            (std::array<int, 5>{6, 0, 0, 6, 12}));
  EXPECT_EQ(bond_profile(parse_smiles("C#C")), (std::array<int, 5>{2, 0, 1, 0, 3}));
}

TEST(Wiener, Examples) {
  EXPECT_EQ(wiener_index(parse_smiles("C")), 0);
  EXPECT_EQ(wiener_index(parse_smiles("CCCCC")), 20);
  EXPECT_EQ(wiener_index(parse_smiles("C1CCCCC1")), 27);
}

TEST(Wiener, MatchesFloydWarshallOnFragments) {
  for (const auto& s : oracle::read_lines(oracle::fixture("corpus200.smi"))) {
    auto g = parse_smiles(s);
    for (const auto& f : brics::substructure_sequence(g)) {
      auto m = brics::materialize(f, g);
      if (m.num_atoms() > 30) continue;
      auto fw = oracle::floyd_warshall(m);
      long w = 0;
      for (int i = 0; i < m.num_atoms(); ++i)
        for (int j = i + 1; j < m.num_atoms(); ++j) w += fw[i][j];
      EXPECT_EQ(wiener_index(m), w) << s;
    }
  }
}

TEST(LogP, Examples) {
  EXPECT_GT(logp_value(parse_smiles("C")), 0.0);
  EXPECT_GE(logp_value(parse_smiles("CCCCCCCC")), 4.0);
  EXPECT_EQ(logp_category(logp_value(parse_smiles("CCCCCCCC"))), 7);
  EXPECT_LT(logp_value(parse_smiles("OCC(O)CO")), 0.0);
}

TEST(LogP, MethyleneNeverDecreases) {
  std::string chain = "C";
  double prev = logp_value(parse_smiles(chain));
  for (int k = 0; k < 25; ++k) {
    chain += "C";
    const double cur = logp_value(parse_smiles(chain));
    EXPECT_GE(cur, prev) << chain;
    prev = cur;
  }
}

TEST(Categories, LogPBoundaries) {
  EXPECT_EQ(logp_category(-3.0), 1);
  EXPECT_EQ(logp_category(0.5), 4);
  EXPECT_EQ(logp_category(4.0), 7);
  const double edges[] = {-2.0, -0.5, 0.0, 1.0, 2.0, 4.0};
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(logp_category(edges[k]), k + 2);
    EXPECT_EQ(logp_category(std::nextafter(edges[k], -1e9)), k + 1);
  }
  EXPECT_THROW(logp_category(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(Categories, UffBoundaries) {
  EXPECT_EQ(uff_category(-5.0), 1);
  EXPECT_EQ(uff_category(120.0), 4);
  EXPECT_EQ(uff_category(500.0), 7);
  const double edges[] = {0.0, 50.0, 100.0, 150.0, 200.0, 300.0};
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(uff_category(edges[k]), k + 2);
    EXPECT_EQ(uff_category(std::nextafter(edges[k], -1e9)), k + 1);
  }
  EXPECT_THROW(uff_category(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(Categories, Monotone) {
  int prev_l = 1, prev_u = 1;
  for (double x = -10.0; x <= 400.0; x += 0.25) {
    const int l = logp_category(x), u = uff_category(x);
    EXPECT_GE(l, prev_l);
    EXPECT_GE(u, prev_u);
    prev_l = l;
    prev_u = u;
  }
}

TEST(Strain, Examples) {
  EXPECT_EQ(strain_proxy(parse_smiles("C")), 0.0);
  EXPECT_EQ(strain_proxy(parse_smiles("C1CC1")), 27.0);
  EXPECT_EQ(strain_proxy(parse_smiles("CC(C)(C)C")), 18.0);
}

TEST(Rings, Examples) {
  EXPECT_EQ(ring_descriptors(parse_smiles("CCCCC")), (std::array<int, 2>{0, 0}));
  EXPECT_EQ(ring_descriptors(parse_smiles("c1ccccc1")), (std::array<int, 2>{6, 1}));
  EXPECT_EQ(ring_descriptors(parse_smiles("c1ccc2ccccc2c1")),
            (std::array<int, 2>{10, 2}));
}

TEST(DescriptorVector, Methane) {
  auto d = descriptor_vector(parse_smiles("C"));
  const int logp = logp_category(logp_value(parse_smiles("C")));
  EXPECT_EQ(d, (DescriptorVector{1, 4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 5, 4, 0,
                                 0, 0, 4, 0, logp, 2, 0, 0}));
  EXPECT_EQ(logp, 4);
}

TEST(DescriptorVector, ClipsAndCounts) {
  auto caps = CapTable::defaults();
  caps.max[slot::kWiener] = 10;
  ClipCounter clips;
  auto d = descriptor_vector(parse_smiles("CCCCCC"), caps, &clips);
  EXPECT_EQ(d[slot::kWiener], 10);
  EXPECT_EQ(clips.per_slot[slot::kWiener], 1u);
  EXPECT_EQ(clips.clipped_values, 1u);
}

TEST(DescriptorVector, OverrideReplacesBuiltins) {
  PropertyOverride p{-3.0, 500.0};
  auto d = descriptor_vector(parse_smiles("C"), CapTable::defaults(), nullptr, &p);
  EXPECT_EQ(d[slot::kLogP], 1);
  EXPECT_EQ(d[slot::kUff], 7);
}

TEST(DescriptorVector, IsomorphicInputsAgree) {
  EXPECT_EQ(descriptor_vector(parse_smiles("OCC")), descriptor_vector(parse_smiles("CCO")));
  EXPECT_EQ(descriptor_vector(parse_smiles("c1ccccc1O")),
            descriptor_vector(parse_smiles("Oc1ccccc1")));
}

TEST(DescriptorVector, InvariantsOnCorpus) {
  const auto caps = CapTable::defaults();
  for (const auto& s : oracle::read_lines(oracle::fixture("corpus200.smi"))) {
    auto g = parse_smiles(s);
    for (const auto& f : brics::substructure_sequence(g)) {
      auto d = descriptor_vector(f, g);
      ASSERT_EQ(d.size(), kDescriptorSize);
      for (std::size_t j = 0; j < kDescriptorSize; ++j) {
        EXPECT_GE(d[j], 0);
        EXPECT_LE(d[j], caps.max[j]);
      }
      EXPECT_EQ(d[slot::kTotalBonds], d[slot::kSingle] + d[slot::kDouble] +
                                          d[slot::kTriple] + d[slot::kAromatic]);
      EXPECT_GE(d[slot::kLogP], 1);
      EXPECT_LE(d[slot::kLogP], 7);
      EXPECT_GE(d[slot::kUff], 1);
      EXPECT_LE(d[slot::kUff], 7);
      auto m = brics::materialize(f, g);
      EXPECT_EQ(d[slot::kTotalAtoms], m.num_atoms() + d[slot::kHydrogen]) << s;
    }
  }
}

TEST(CapTable, Validation) {
  EXPECT_NO_THROW(CapTable::defaults().validate());
  auto bad = CapTable::defaults();
  bad.max[3] = 0;
  EXPECT_THROW(bad.validate(), DomainError);
  EXPECT_EQ(CapTable::defaults().max[slot::kLogP], 7);
  EXPECT_EQ(CapTable::defaults().max[slot::kUff], 7);
}

}  // namespace

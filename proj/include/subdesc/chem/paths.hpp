//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "subdesc/chem/molgraph.hpp"

namespace subdesc::chem {

/// All-pairs shortest-path bond counts over heavy atoms, row-major.
class SPDMatrix {
 public:
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  SPDMatrix() = default;
  explicit SPDMatrix(int n) : n_(n), dist_(static_cast<std::size_t>(n) * n, kUnreachable) {}

  int size() const { return n_; }
  int operator()(int i, int j) const { return dist_[idx(i, j)]; }
  int& at(int i, int j) { return dist_[idx(i, j)]; }
  bool reachable(int i, int j) const { return (*this)(i, j) != kUnreachable; }
  const std::vector<int>& data() const { return dist_; }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  int n_ = 0;
  std::vector<int> dist_;
};

/// BFS from every atom.
inline SPDMatrix shortest_path_matrix(const MolGraph& g) {
  const int n = g.num_atoms();
  SPDMatrix m(n);
  std::vector<int> queue;
  queue.reserve(n);
  for (int s = 0; s < n; ++s) {
    queue.clear();
    queue.push_back(s);
    m.at(s, s) = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      int x = queue[q];
      for (auto nb : g.neighbors(x)) {
        if (m(s, nb.atom) != SPDMatrix::kUnreachable) continue;
        m.at(s, nb.atom) = m(s, x) + 1;
        queue.push_back(nb.atom);
      }
    }
  }
  return m;
}

}  // namespace subdesc::chem

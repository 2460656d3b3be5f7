//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace subdesc::chem {

using Edge = std::pair<int, int>;

namespace detail {

// Adjacency as (neighbor, edge index), neighbors in edge-index order.
inline std::vector<std::vector<std::pair<int, int>>> adjacency(
    int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    adj[edges[e].first].emplace_back(edges[e].second, e);
    adj[edges[e].second].emplace_back(edges[e].first, e);
  }
  return adj;
}

class EdgeSet {
 public:
  explicit EdgeSet(std::size_t nbits) : words_((nbits + 63) / 64, 0) {}

  void flip(int bit) { words_[bit / 64] ^= std::uint64_t{1} << (bit % 64); }
  bool test(int bit) const { return (words_[bit / 64] >> (bit % 64)) & 1U; }

  int lowest() const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] != 0)
        return static_cast<int>(w * 64) + __builtin_ctzll(words_[w]);
    return -1;
  }

  EdgeSet& operator^=(const EdgeSet& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
    return *this;
  }

  auto operator<=>(const EdgeSet&) const = default;

 private:
  std::vector<std::uint64_t> words_;
};

}  // namespace detail

/// Marks every edge that lies on at least one cycle (i.e. is not a bridge).
inline std::vector<bool> cyclic_edges(int n, const std::vector<Edge>& edges) {
  auto adj = detail::adjacency(n, edges);
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> cyclic(edges.size(), true);
  int timer = 0;

  // Iterative Tarjan bridge finding: frame = (vertex, parent edge, cursor).
  struct Frame {
    int v, parent_edge;
    std::size_t cursor;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.cursor < adj[f.v].size()) {
        auto [w, e] = adj[f.v][f.cursor++];
        if (e == f.parent_edge) continue;
        if (disc[w] < 0) {
          disc[w] = low[w] = timer++;
          stack.push_back({w, e, 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
        continue;
      }
      Frame done = f;
      stack.pop_back();
      if (!stack.empty()) {
        Frame& p = stack.back();
        low[p.v] = std::min(low[p.v], low[done.v]);
        if (low[done.v] > disc[p.v]) cyclic[done.parent_edge] = false;
      }
    }
  }
  return cyclic;
}

/// Smallest set of smallest rings: a minimum-weight cycle basis found from
/// Horton's candidate cycles with GF(2) elimination. Each ring is returned as
/// an ordered closed walk of vertex indices starting at its smallest vertex.
inline std::vector<std::vector<int>> sssr(int n, const std::vector<Edge>& edges) {
  const auto cyclic = cyclic_edges(n, edges);
  std::vector<Edge> ring_edges;
  std::vector<int> ring_edge_id;  // index into `edges`
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (cyclic[e]) {
      ring_edges.push_back(edges[e]);
      ring_edge_id.push_back(static_cast<int>(e));
    }
  if (ring_edges.empty()) return {};

  // Cycle-space dimension of the cyclic subgraph: E - V + C.
  auto adj = detail::adjacency(n, ring_edges);
  int ring_vertices = 0, components = 0;
  {
    std::vector<bool> seen(n, false);
    for (int v = 0; v < n; ++v) {
      if (adj[v].empty() || seen[v]) continue;
      ++components;
      std::vector<int> todo{v};
      seen[v] = true;
      while (!todo.empty()) {
        int x = todo.back();
        todo.pop_back();
        ++ring_vertices;
        for (auto [w, e] : adj[x])
          if (!seen[w]) seen[w] = true, todo.push_back(w);
      }
    }
  }
  const int rank_needed =
      static_cast<int>(ring_edges.size()) - ring_vertices + components;

  const int m = static_cast<int>(ring_edges.size());
  std::map<std::pair<int, std::vector<int>>, detail::EdgeSet> candidates;

  std::vector<int> dist(n), parent_v(n), parent_e(n);
  for (int r = 0; r < n; ++r) {
    if (adj[r].empty()) continue;
    std::fill(dist.begin(), dist.end(), -1);
    std::vector<int> queue{r};
    dist[r] = 0;
    parent_v[r] = parent_e[r] = -1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int x = queue[qi];
      for (auto [w, e] : adj[x]) {
        if (dist[w] >= 0) continue;
        dist[w] = dist[x] + 1;
        parent_v[w] = x;
        parent_e[w] = e;
        queue.push_back(w);
      }
    }
    auto path_to_root = [&](int v) {
      std::vector<int> verts{v};
      while (parent_v[v] >= 0) {
        v = parent_v[v];
        verts.push_back(v);
      }
      return verts;
    };
    for (int e = 0; e < m; ++e) {
      auto [x, y] = ring_edges[e];
      if (dist[x] < 0 || dist[y] < 0) continue;
      if (parent_e[x] == e || parent_e[y] == e) continue;
      auto px = path_to_root(x);
      auto py = path_to_root(y);
      // Paths may only share the root.
      std::vector<int> a(px.begin(), px.end() - 1), b(py.begin(), py.end() - 1);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      std::vector<int> common;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                            std::back_inserter(common));
      if (!common.empty()) continue;

      detail::EdgeSet set(m);
      std::vector<int> ids{e};
      set.flip(e);
      for (int v = x; parent_v[v] >= 0; v = parent_v[v])
        set.flip(parent_e[v]), ids.push_back(parent_e[v]);
      for (int v = y; parent_v[v] >= 0; v = parent_v[v])
        set.flip(parent_e[v]), ids.push_back(parent_e[v]);
      std::sort(ids.begin(), ids.end());
      int len = static_cast<int>(ids.size());
      candidates.emplace(std::make_pair(len, std::move(ids)), std::move(set));
    }
  }

  // Greedy independent selection in (length, edge ids) order.
  std::vector<detail::EdgeSet> basis;  // reduced rows
  std::vector<int> pivots;
  std::vector<std::vector<int>> chosen;
  for (auto& [key, set] : candidates) {
    if (static_cast<int>(chosen.size()) == rank_needed) break;
    detail::EdgeSet red = set;
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (red.test(pivots[i])) red ^= basis[i];
    int piv = red.lowest();
    if (piv < 0) continue;
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (basis[i].test(piv)) basis[i] ^= red;
    basis.push_back(red);
    pivots.push_back(piv);
    chosen.push_back(key.second);
  }

  // Edge set -> ordered vertex cycle.
  std::vector<std::vector<int>> rings;
  for (const auto& ids : chosen) {
    std::map<int, std::vector<int>> local;
    for (int e : ids) {
      auto [x, y] = ring_edges[e];
      local[x].push_back(y);
      local[y].push_back(x);
    }
    int start = local.begin()->first;
    std::vector<int> cyc{start};
    int prev = -1, cur = start;
    for (;;) {
      const auto& nb = local[cur];
      int next = (nb[0] != prev) ? nb[0] : nb[1];
      if (prev == -1) next = std::min(nb[0], nb[1]);
      if (next == start) break;
      cyc.push_back(next);
      prev = cur;
      cur = next;
    }
    rings.push_back(std::move(cyc));
  }
  std::sort(rings.begin(), rings.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return rings;
}

}  // namespace subdesc::chem

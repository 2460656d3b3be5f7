//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "subdesc/error.hpp"
#include "subdesc/graphprep.hpp"
#include "subdesc/random.hpp"
#include "subdesc/refnet/projection.hpp"

namespace subdesc::refnet {

/// Width of the one-hot node input: atom id block then chirality block.
inline constexpr int kNodeInputDim = graphprep::kAtomVocab + graphprep::kChiralityVocab;

inline MatrixXd node_inputs(const graphprep::GraphFeatures& gf) {
  MatrixXd x = MatrixXd::Zero(gf.num_nodes(), kNodeInputDim);
  for (int i = 0; i < gf.num_nodes(); ++i) {
    x(i, gf.nodes[i].atom) = 1.0;
    x(i, graphprep::kAtomVocab + gf.nodes[i].chirality) = 1.0;
  }
  return x;
}

inline MatrixXd adjacency(const graphprep::GraphFeatures& gf) {
  MatrixXd a = MatrixXd::Zero(gf.num_nodes(), gf.num_nodes());
  for (auto [i, j] : gf.edges) a(i, j) = a(j, i) = 1.0;
  return a;
}

/// D^-1/2 (A + I) D^-1/2 with degrees counted including the self-loop.
inline MatrixXd gcn_propagation(const graphprep::GraphFeatures& gf) {
  MatrixXd a = adjacency(gf);
  a.diagonal().array() += 1.0;
  const VectorXd inv_sqrt = a.rowwise().sum().array().rsqrt();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

// ---------------------------------------------------------------- GCN

struct GCNParams {
  std::vector<MatrixXd> w;  // layer k: out x in

  int layers() const { return static_cast<int>(w.size()); }
  int out_dim() const { return static_cast<int>(w.back().rows()); }

  /// `dims` = {input, hidden..., output}.
  static GCNParams init(const std::vector<int>& dims, Rng& rng) {
    GCNParams p;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k)
      p.w.push_back(random_matrix(dims[k + 1], dims[k], std::sqrt(2.0 / dims[k]), rng));
    return p;
  }

  static GCNParams zeros_like(const GCNParams& p) {
    GCNParams z;
    for (const auto& m : p.w) z.w.push_back(MatrixXd::Zero(m.rows(), m.cols()));
    return z;
  }
};

using GCNGrads = GCNParams;

struct GCNCache {
  MatrixXd prop;
  std::vector<MatrixXd> aggregated;  // prop * H_k, per layer
  std::vector<MatrixXd> pre;         // pre-activation per layer
};

/// K rounds of h <- ReLU(prop * h * W^T), then the mean over nodes.
inline RowVectorXd gcn_encode(const graphprep::GraphFeatures& gf, const GCNParams& p,
                              GCNCache* cache = nullptr) {
  if (gf.num_nodes() == 0) throw DomainError("cannot encode an empty graph");
  GCNCache local;
  GCNCache& c = cache ? *cache : local;
  c.prop = gcn_propagation(gf);
  c.aggregated.clear();
  c.pre.clear();
  MatrixXd h = node_inputs(gf);
  for (const auto& w : p.w) {
    c.aggregated.push_back(c.prop * h);
    c.pre.push_back(c.aggregated.back() * w.transpose());
    h = c.pre.back().cwiseMax(0.0);
  }
  return h.colwise().mean();
}

inline RowVectorXd gcn_encode(const graphprep::GraphView& v, const GCNParams& p,
                              GCNCache* cache = nullptr) {
  return gcn_encode(v.features, p, cache);
}

inline void gcn_backward(const RowVectorXd& d_embedding, const GCNParams& p,
                         const GCNCache& c, GCNGrads& g) {
  const auto n = c.prop.rows();
  MatrixXd dh = d_embedding.replicate(n, 1) / static_cast<double>(n);
  for (int k = p.layers() - 1; k >= 0; --k) {
    const MatrixXd dz = (c.pre[k].array() > 0.0).select(dh, 0.0);
    g.w[k].noalias() += dz.transpose() * c.aggregated[k];
    if (k > 0) dh = c.prop.transpose() * (dz * p.w[k]);
  }
}

// ---------------------------------------------------------------- GIN

struct GINLayer {
  MatrixXd w1;      // hidden x in
  RowVectorXd b1;   // hidden
  MatrixXd w2;      // out x hidden
  RowVectorXd b2;   // out
  double eps = 0.0;
};

struct GINParams {
  std::vector<GINLayer> layers;

  int out_dim() const { return static_cast<int>(layers.back().w2.rows()); }

  /// `dims` = {input, width..., output}; each MLP's hidden width equals
  /// its output width.
  static GINParams init(const std::vector<int>& dims, Rng& rng) {
    GINParams p;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
      const int in = dims[k], out = dims[k + 1];
      p.layers.push_back({random_matrix(out, in, std::sqrt(2.0 / in), rng),
                          RowVectorXd::Zero(out),
                          random_matrix(out, out, std::sqrt(1.0 / out), rng),
                          RowVectorXd::Zero(out), 0.0});
    }
    return p;
  }

  static GINParams zeros_like(const GINParams& p) {
    GINParams z;
    for (const auto& l : p.layers)
      z.layers.push_back({MatrixXd::Zero(l.w1.rows(), l.w1.cols()),
                          RowVectorXd::Zero(l.b1.size()),
                          MatrixXd::Zero(l.w2.rows(), l.w2.cols()),
                          RowVectorXd::Zero(l.b2.size()), 0.0});
    return z;
  }
};

using GINGrads = GINParams;

struct GINCache {
  MatrixXd adj;
  std::vector<MatrixXd> input;  // H_{k-1}
  std::vector<MatrixXd> mixed;  // (1 + eps) H + A H
  std::vector<MatrixXd> pre;    // first MLP layer pre-activation
};

/// K rounds of h <- MLP((1 + eps) h + sum of neighbour h), then the mean
/// over nodes. The MLP is Linear -> ReLU -> Linear.
inline RowVectorXd gin_encode(const graphprep::GraphFeatures& gf, const GINParams& p,
                              GINCache* cache = nullptr) {
  if (gf.num_nodes() == 0) throw DomainError("cannot encode an empty graph");
  GINCache local;
  GINCache& c = cache ? *cache : local;
  c.adj = adjacency(gf);
  c.input.clear();
  c.mixed.clear();
  c.pre.clear();
  MatrixXd h = node_inputs(gf);
  for (const auto& l : p.layers) {
    c.input.push_back(h);
    c.mixed.push_back((1.0 + l.eps) * h + c.adj * h);
    c.pre.push_back((c.mixed.back() * l.w1.transpose()).rowwise() + l.b1);
    h = (c.pre.back().cwiseMax(0.0) * l.w2.transpose()).rowwise() + l.b2;
  }
  return h.colwise().mean();
}

inline RowVectorXd gin_encode(const graphprep::GraphView& v, const GINParams& p,
                              GINCache* cache = nullptr) {
  return gin_encode(v.features, p, cache);
}

inline void gin_backward(const RowVectorXd& d_embedding, const GINParams& p,
                         const GINCache& c, GINGrads& g) {
  const auto n = c.adj.rows();
  MatrixXd dh = d_embedding.replicate(n, 1) / static_cast<double>(n);
  for (int k = static_cast<int>(p.layers.size()) - 1; k >= 0; --k) {
    const auto& l = p.layers[k];
    auto& gl = g.layers[k];
    const MatrixXd r = c.pre[k].cwiseMax(0.0);
    gl.w2.noalias() += dh.transpose() * r;
    gl.b2 += dh.colwise().sum();
    const MatrixXd dpre = (c.pre[k].array() > 0.0).select(dh * l.w2, 0.0);
    gl.w1.noalias() += dpre.transpose() * c.mixed[k];
    gl.b1 += dpre.colwise().sum();
    const MatrixXd dmixed = dpre * l.w1;
    gl.eps += (dmixed.array() * c.input[k].array()).sum();
    if (k > 0) dh = (1.0 + l.eps) * dmixed + c.adj.transpose() * dmixed;
  }
}

}  // namespace subdesc::refnet

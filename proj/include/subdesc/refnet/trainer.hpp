//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "subdesc/brics.hpp"
#include "subdesc/chem/smiles_parser.hpp"
#include "subdesc/descriptors.hpp"
#include "subdesc/error.hpp"
#include "subdesc/graphprep.hpp"
#include "subdesc/losses.hpp"
#include "subdesc/provider.hpp"
#include "subdesc/random.hpp"
#include "subdesc/refnet/gnn.hpp"
#include "subdesc/refnet/lm.hpp"
#include "subdesc/refnet/projection.hpp"
#include "subdesc/tokenizer.hpp"

namespace subdesc::refnet {

enum class GraphEncoder { kGcn, kGin };

struct ModelConfig {
  int vocab = 0;
  int lm_dim = 128;
  GraphEncoder encoder = GraphEncoder::kGcn;
  std::vector<int> gnn_widths{64, 64};  // per-layer output widths
  int proj_dim = 64;
  double lr = 1e-2;
  double mask_rate = 0.15;
  bool tied_projections = false;
  losses::LossConfig loss;
};

/// All trainable parameters and batch-norm buffers. The same type holds
/// gradients.
struct Model {
  ModelConfig config;
  LMEncoderParams lm;
  GCNParams gcn;
  GINParams gin;
  ProjectionParams psi_lang, psi_graph;

  int graph_dim() const {
    return config.encoder == GraphEncoder::kGcn ? gcn.out_dim() : gin.out_dim();
  }

  static Model init(const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.tied_projections)
      throw DomainError("language and graph projections must be distinct blocks");
    if (cfg.vocab <= tokenizer::kSpecialCount) throw DomainError("vocabulary too small");
    if (cfg.gnn_widths.empty()) throw DomainError("graph encoder needs at least one layer");
    cfg.loss.validate();
    Rng rng(derive_seed(seed, {0x6d6f64656cULL}));
    Model m;
    m.config = cfg;
    m.lm = LMEncoderParams::init(cfg.vocab, cfg.lm_dim, rng);
    std::vector<int> dims{kNodeInputDim};
    dims.insert(dims.end(), cfg.gnn_widths.begin(), cfg.gnn_widths.end());
    if (cfg.encoder == GraphEncoder::kGcn)
      m.gcn = GCNParams::init(dims, rng);
    else
      m.gin = GINParams::init(dims, rng);
    m.psi_lang = ProjectionParams::init(cfg.lm_dim, cfg.lm_dim, cfg.proj_dim, rng);
    const int gd = cfg.gnn_widths.back();
    m.psi_graph = ProjectionParams::init(gd, gd, cfg.proj_dim, rng);
    return m;
  }

  /// Zero gradients shaped like `m`.
  static Model zeros_like(const Model& m) {
    Model g;
    g.config = m.config;
    g.lm = LMEncoderParams::zeros_like(m.lm);
    g.gcn = GCNParams::zeros_like(m.gcn);
    g.gin = GINParams::zeros_like(m.gin);
    g.psi_lang = ProjectionParams::zeros_like(m.psi_lang);
    g.psi_graph = ProjectionParams::zeros_like(m.psi_graph);
    return g;
  }
};

/// Calls fn(name, array...) for every trainable array, walking the given
/// models in lockstep. Arrays are MatrixXd, RowVectorXd or double.
template <class Fn, class... Ms>
void visit_trainable(Fn&& fn, Ms&... ms) {
  fn("lm.embedding", ms.lm.embedding...);
  fn("lm.slot_embedding", ms.lm.slot_embedding...);
  fn("lm.head", ms.lm.head...);
  fn("lm.head_bias", ms.lm.head_bias...);
  const auto& first = std::get<0>(std::tie(ms...));
  for (std::size_t k = 0; k < first.gcn.w.size(); ++k)
    fn("gcn." + std::to_string(k) + ".w", ms.gcn.w[k]...);
  for (std::size_t k = 0; k < first.gin.layers.size(); ++k) {
    const std::string p = "gin." + std::to_string(k) + ".";
    fn(p + "w1", ms.gin.layers[k].w1...);
    fn(p + "b1", ms.gin.layers[k].b1...);
    fn(p + "w2", ms.gin.layers[k].w2...);
    fn(p + "b2", ms.gin.layers[k].b2...);
    fn(p + "eps", ms.gin.layers[k].eps...);
  }
  fn("psi_lang.w1", ms.psi_lang.w1...);
  fn("psi_lang.w2", ms.psi_lang.w2...);
  fn("psi_lang.bn1.gamma", ms.psi_lang.bn1.gamma...);
  fn("psi_lang.bn1.beta", ms.psi_lang.bn1.beta...);
  fn("psi_lang.bn2.gamma", ms.psi_lang.bn2.gamma...);
  fn("psi_lang.bn2.beta", ms.psi_lang.bn2.beta...);
  fn("psi_graph.w1", ms.psi_graph.w1...);
  fn("psi_graph.w2", ms.psi_graph.w2...);
  fn("psi_graph.bn1.gamma", ms.psi_graph.bn1.gamma...);
  fn("psi_graph.bn1.beta", ms.psi_graph.bn1.beta...);
  fn("psi_graph.bn2.gamma", ms.psi_graph.bn2.gamma...);
  fn("psi_graph.bn2.beta", ms.psi_graph.bn2.beta...);
}

/// Batch-norm running statistics.
template <class Fn, class M>
void visit_buffers(Fn&& fn, M& m) {
  fn("psi_lang.bn1.running_mean", m.psi_lang.bn1.running_mean);
  fn("psi_lang.bn1.running_var", m.psi_lang.bn1.running_var);
  fn("psi_lang.bn2.running_mean", m.psi_lang.bn2.running_mean);
  fn("psi_lang.bn2.running_var", m.psi_lang.bn2.running_var);
  fn("psi_graph.bn1.running_mean", m.psi_graph.bn1.running_mean);
  fn("psi_graph.bn1.running_var", m.psi_graph.bn1.running_var);
  fn("psi_graph.bn2.running_mean", m.psi_graph.bn2.running_mean);
  fn("psi_graph.bn2.running_var", m.psi_graph.bn2.running_var);
}

/// One molecule ready for training: its token sequence and graph.
struct PreparedMolecule {
  std::string smiles;
  tokenizer::TokenSequence tokens;
  graphprep::GraphFeatures graph;
};

inline tokenizer::SubstructureRows substructure_rows(
    const chem::MolGraph& g, const descriptors::CapTable& caps,
    descriptors::ClipCounter* clips = nullptr,
    const descriptors::PropertyProvider* provider = nullptr) {
  const auto fs = brics::fragment_with_pairs(g);
  tokenizer::SubstructureRows rows;
  for (const auto& f : fs.brics_fragments)
    rows.rows.push_back(descriptors::fragment_descriptors(f, g, caps, clips, provider));
  rows.pair_start = rows.rows.size();
  for (const auto& f : fs.pair_fragments)
    rows.rows.push_back(descriptors::fragment_descriptors(f, g, caps, clips, provider));
  return rows;
}

inline PreparedMolecule prepare(const std::string& smiles, const tokenizer::Vocab& vocab,
                                const descriptors::PropertyProvider* provider = nullptr) {
  const auto g = chem::parse_smiles(smiles);
  return {smiles, tokenizer::encode(substructure_rows(g, vocab.caps(), nullptr, provider), vocab),
          graphprep::featurize(g)};
}

struct LossReport {
  int step = 0;
  double l_lang = 0.0;
  double l_graph = 0.0;
  double l_bimodal = 0.0;
  double total = 0.0;

  bool operator==(const LossReport&) const = default;
};

namespace detail {

struct GraphPass {
  GCNCache gcn;
  GINCache gin;
};

inline RowVectorXd encode_graph(const Model& m, const graphprep::GraphFeatures& gf,
                                GraphPass& pass) {
  return m.config.encoder == GraphEncoder::kGcn ? gcn_encode(gf, m.gcn, &pass.gcn)
                                                : gin_encode(gf, m.gin, &pass.gin);
}

inline void backward_graph(const Model& m, const RowVectorXd& d, const GraphPass& pass,
                           Model& g) {
  if (m.config.encoder == GraphEncoder::kGcn)
    gcn_backward(d, m.gcn, pass.gcn, g.gcn);
  else
    gin_backward(d, m.gin, pass.gin, g.gin);
}

}  // namespace detail

/// Forward and backward pass of the combined objective over one batch.
/// Returns the loss report; gradients go to `grads`, and the projection
/// caches to `cache_lang` / `cache_graph` for the running-stat update.
inline LossReport compute_gradients(const Model& m, const std::vector<PreparedMolecule>& batch,
                                    std::uint64_t seed, Model& grads,
                                    ProjectionCache* cache_lang = nullptr,
                                    ProjectionCache* cache_graph = nullptr) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n < 2) throw DomainError("a training batch needs at least two molecules");
  const auto& cfg = m.config.loss;
  grads = Model::zeros_like(m);

  // Language side; the head runs once over all masked rows of the batch.
  std::vector<LMOutput> lm_out;
  MatrixXd e_lang(n, m.lm.dim());
  std::vector<int> targets;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ms = tokenizer::mask_tokens(batch[i].tokens, m.config.mask_rate,
                                           derive_seed(seed, {static_cast<std::uint64_t>(i), 0}));
    lm_out.push_back(lm_encode(ms, m.lm, false));
    e_lang.row(i) = lm_out.back().embedding;
    targets.insert(targets.end(), ms.targets.begin(), ms.targets.end());
  }
  MatrixXd hidden(static_cast<Eigen::Index>(targets.size()), m.lm.dim());
  for (Eigen::Index i = 0, row = 0; i < n; ++i) {
    hidden.middleRows(row, lm_out[i].hidden.rows()) = lm_out[i].hidden;
    row += lm_out[i].hidden.rows();
  }
  const MatrixXd logits = (hidden * m.lm.head).rowwise() + m.lm.head_bias;
  const auto lang = losses::masked_lm_ce(logits, targets);

  // Graph side: two masked views for the contrastive term, the clean graph
  // for the bimodal term.
  const int gd = m.graph_dim();
  MatrixXd v1(n, gd), v2(n, gd), e_graph(n, gd);
  std::vector<detail::GraphPass> p1(batch.size()), p2(batch.size()), p0(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto views = graphprep::augment(batch[i].graph, graphprep::AugmentPolicy::kGcnGin,
                                          derive_seed(seed, {static_cast<std::uint64_t>(i), 1}));
    v1.row(i) = detail::encode_graph(m, views[0].features, p1[i]);
    v2.row(i) = detail::encode_graph(m, views[1].features, p2[i]);
    e_graph.row(i) = detail::encode_graph(m, batch[i].graph, p0[i]);
  }
  const auto graph = losses::ntxent(v1, v2, cfg.tau, cfg.symmetric);
  auto bimodal = losses::bimodal_loss(e_lang, e_graph, m.psi_lang, m.psi_graph, cfg.tau,
                                      Mode::kTrain, cfg.symmetric);

  LossReport r;
  r.l_lang = lang.loss;
  r.l_graph = graph.loss;
  r.l_bimodal = bimodal.loss;
  r.total = losses::combined_loss(r.l_lang, r.l_graph, r.l_bimodal, cfg);

  // Backward, each term scaled by its weight.
  const MatrixXd d_hidden = lm_head_backward(hidden, cfg.alpha * lang.grad, m.lm, grads.lm);
  const MatrixXd d_lang = cfg.gamma * bimodal.grad_lang;
  for (Eigen::Index i = 0, row = 0; i < n; ++i) {
    const auto rows = lm_out[i].hidden.rows();
    lm_body_backward(lm_out[i], d_lang.row(i), d_hidden.middleRows(row, rows), grads.lm);
    row += rows;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::backward_graph(m, cfg.beta * graph.grad_u.row(i), p1[i], grads);
    detail::backward_graph(m, cfg.beta * graph.grad_v.row(i), p2[i], grads);
    detail::backward_graph(m, cfg.gamma * bimodal.grad_graph.row(i), p0[i], grads);
  }
  auto scale_into = [&](ProjectionParams& dst, const ProjectionGrads& src) {
    dst.w1 = cfg.gamma * src.w1;
    dst.w2 = cfg.gamma * src.w2;
    dst.bn1.gamma = cfg.gamma * src.bn1.gamma;
    dst.bn1.beta = cfg.gamma * src.bn1.beta;
    dst.bn2.gamma = cfg.gamma * src.bn2.gamma;
    dst.bn2.beta = cfg.gamma * src.bn2.beta;
  };
  scale_into(grads.psi_lang, bimodal.psi_lang);
  scale_into(grads.psi_graph, bimodal.psi_graph);
  if (cache_lang) *cache_lang = std::move(bimodal.cache_lang);
  if (cache_graph) *cache_graph = std::move(bimodal.cache_graph);
  return r;
}

/// Plain SGD: p <- p - lr * g.
inline void sgd_update(Model& m, const Model& g, double lr) {
  visit_trainable([lr](const std::string&, auto& p, const auto& d) { p -= lr * d; }, m, g);
}

/// One optimisation step; `seed` drives this step's masks and views.
inline LossReport pretrain_step(Model& m, const std::vector<PreparedMolecule>& batch,
                                std::uint64_t seed) {
  Model grads;
  ProjectionCache cl, cg;
  LossReport r = compute_gradients(m, batch, seed, grads, &cl, &cg);
  sgd_update(m, grads, m.config.lr);
  update_running_stats(m.psi_lang, cl);
  update_running_stats(m.psi_graph, cg);
  return r;
}

/// Mean cosine of matched and mismatched (language, graph) pairs after
/// projection in eval mode, on unmasked inputs.
struct Alignment {
  double matched = 0.0;
  double mismatched = 0.0;
  double gap() const { return matched - mismatched; }
};

inline Alignment alignment(const Model& m, const std::vector<PreparedMolecule>& batch) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n < 2) throw DomainError("alignment needs at least two molecules");
  MatrixXd e_lang(n, m.lm.dim()), e_graph(n, m.graph_dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    e_lang.row(i) = lm_encode(batch[i].tokens.ids, {}, m.lm).embedding;
    detail::GraphPass pass;
    e_graph.row(i) = detail::encode_graph(m, batch[i].graph, pass);
  }
  MatrixXd zl = project(e_lang, m.psi_lang, Mode::kEval);
  MatrixXd zg = project(e_graph, m.psi_graph, Mode::kEval);
  zl.rowwise().normalize();
  zg.rowwise().normalize();
  const MatrixXd cos = zl * zg.transpose();
  Alignment a;
  a.matched = cos.diagonal().mean();
  a.mismatched = (cos.sum() - cos.diagonal().sum()) / static_cast<double>(n * (n - 1));
  return a;
}

struct PretrainRun {
  Model model;
  std::vector<LossReport> log;  // one entry per step, `step` counted from 1
  Alignment initial;
  Alignment final;
};

/// Full-batch SGD from `Model::init(cfg, seed)`. Step t (1-based) draws its
/// masks and views from `derive_seed(seed, {t - 1})`.
inline PretrainRun pretrain(const std::vector<PreparedMolecule>& batch, const ModelConfig& cfg,
                            int steps, std::uint64_t seed,
                            const std::function<void(const LossReport&)>& on_step = {}) {
  if (steps < 1) throw DomainError("steps must be >= 1");
  PretrainRun run{Model::init(cfg, seed), {}, {}, {}};
  run.initial = alignment(run.model, batch);
  run.log.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    LossReport r = pretrain_step(run.model, batch, derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    r.step = t + 1;
    if (on_step) on_step(r);
    run.log.push_back(r);
  }
  run.final = alignment(run.model, batch);
  return run;
}

}  // namespace subdesc::refnet

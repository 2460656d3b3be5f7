//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "subdesc/error.hpp"
#include "subdesc/refnet/projection.hpp"

namespace subdesc::losses {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LossConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double tau = 0.1;
  std::vector<double> class_weights;
  double eps = 1e-12;
  bool symmetric = false;  // average both NT-Xent directions

  void validate() const {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    for (double w : class_weights)
      if (!(w > 0.0)) throw DomainError("class weights must be positive");
  }
};

inline double cosine_sim(const VectorXd& u, const VectorXd& v) {
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DomainError("cosine of a zero vector");
  return u.dot(v) / (nu * nv);
}

inline double combined_loss(double l_lang, double l_graph, double l_bimodal,
                            const LossConfig& cfg) {
  return cfg.alpha * l_lang + cfg.beta * l_graph + cfg.gamma * l_bimodal;
}

/// A scalar loss and its gradients w.r.t. the two inputs.
struct PairLoss {
  double loss = 0.0;
  MatrixXd grad_u, grad_v;
};

namespace detail {

inline MatrixXd normalized_rows(const MatrixXd& x, VectorXd& norms) {
  norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i)
    if (!(norms(i) > 0.0)) throw DomainError("zero-norm embedding in row " + std::to_string(i));
  return x.array().colwise() / norms.array();
}

// Pulls a gradient w.r.t. normalised rows back to the raw rows.
inline MatrixXd through_normalization(const MatrixXd& g, const MatrixXd& xhat,
                                      const VectorXd& norms) {
  const VectorXd proj = (g.array() * xhat.array()).rowwise().sum();
  MatrixXd out = g - (xhat.array().colwise() * proj.array()).matrix();
  return out.array().colwise() / norms.array();
}

// Row-wise cross-entropy against the diagonal of `s`: mean_i of
// -s_ii + logsumexp_k s_ik, with dL/ds in `ds`.
inline double diagonal_ce(const MatrixXd& s, MatrixXd& ds) {
  const Eigen::Index n = s.rows();
  ds.resize(n, n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = s.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (s.row(i).array() - m).exp();
    const double z = e.sum();
    loss += m + std::log(z) - s(i, i);
    ds.row(i) = e / z;
    ds(i, i) -= 1.0;
  }
  ds /= static_cast<double>(n);
  return loss / static_cast<double>(n);
}

inline PairLoss ntxent_one_way(const MatrixXd& uh, const MatrixXd& vh, double tau) {
  const MatrixXd s = uh * vh.transpose() / tau;
  MatrixXd ds;
  PairLoss r;
  r.loss = diagonal_ce(s, ds);
  r.grad_u = ds * vh / tau;
  r.grad_v = ds.transpose() * uh / tau;
  return r;
}

}  // namespace detail

/// NT-Xent with positives on the diagonal: mean over i of
/// -log(exp(sim(u_i, v_i)/tau) / sum_k exp(sim(u_i, v_k)/tau)).
/// `symmetric` averages the U->V and V->U directions.
inline PairLoss ntxent(const MatrixXd& u, const MatrixXd& v, double tau,
                       bool symmetric = false) {
  if (u.rows() == 0) throw DomainError("NT-Xent needs at least one pair");
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw DomainError("NT-Xent batches differ in shape");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  VectorXd nu, nv;
  const MatrixXd uh = detail::normalized_rows(u, nu);
  const MatrixXd vh = detail::normalized_rows(v, nv);
  PairLoss r = detail::ntxent_one_way(uh, vh, tau);
  if (symmetric) {
    PairLoss back = detail::ntxent_one_way(vh, uh, tau);
    r.loss = 0.5 * (r.loss + back.loss);
    r.grad_u = 0.5 * (r.grad_u + back.grad_v);
    r.grad_v = 0.5 * (r.grad_v + back.grad_u);
  }
  r.grad_u = detail::through_normalization(r.grad_u, uh, nu);
  r.grad_v = detail::through_normalization(r.grad_v, vh, nv);
  return r;
}

struct LogitLoss {
  double loss = 0.0;
  MatrixXd grad;  // w.r.t. the logits
};

/// Mean over rows of -log softmax(logits_row)[target].
inline LogitLoss masked_lm_ce(const MatrixXd& logits, const std::vector<int>& targets) {
  if (logits.rows() == 0) throw DomainError("no masked positions");
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows())
    throw DomainError("one target per logit row required");
  const Eigen::Index s = logits.cols();
  // Column-major copy of the transpose keeps each row's softmax contiguous.
  MatrixXd p = logits.transpose();
  LogitLoss r;
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= s)
      throw DomainError("target id " + std::to_string(t) + " outside vocabulary");
    auto col = p.col(i);
    const double m = col.maxCoeff();
    const double x_t = col(t);
    col = (col.array() - m).exp();
    const double z = col.sum();
    r.loss += m + std::log(z) - x_t;
    col /= z;
    col(t) -= 1.0;
  }
  r.grad = p.transpose();
  const double n = static_cast<double>(logits.rows());
  r.loss /= n;
  r.grad /= n;
  return r;
}

/// -(1/N) sum_i sum_c w_c y_ic log(p_ic + eps).
inline double weighted_ce(const MatrixXd& probs, const MatrixXd& labels,
                          const std::vector<double>& weights, double eps = 1e-12) {
  if (probs.rows() == 0) throw DomainError("empty batch");
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols())
    throw DomainError("probabilities and labels differ in shape");
  if (static_cast<Eigen::Index>(weights.size()) != probs.cols())
    throw DomainError("one weight per class required");
  if ((probs.array() < 0.0).any()) throw DomainError("negative probability");
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-6)
      throw DomainError("probability row " + std::to_string(i) + " does not sum to 1");
  for (double w : weights)
    if (!(w > 0.0)) throw DomainError("class weights must be positive");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    for (Eigen::Index c = 0; c < probs.cols(); ++c)
      total += weights[static_cast<std::size_t>(c)] * labels(i, c) * std::log(probs(i, c) + eps);
  return -total / static_cast<double>(probs.rows());
}

/// Result of the bimodal loss: gradients w.r.t. both embedding batches and
/// both projection blocks, plus the caches needed for running statistics.
struct BimodalLoss {
  double loss = 0.0;
  MatrixXd grad_lang, grad_graph;
  refnet::ProjectionGrads psi_lang, psi_graph;
  refnet::ProjectionCache cache_lang, cache_graph;
  MatrixXd z_lang, z_graph;  // projected batches
};

/// NT-Xent between psi_lang(E_lang) and psi_graph(E_graph). The two
/// projection blocks must be distinct objects.
inline BimodalLoss bimodal_loss(const MatrixXd& e_lang, const MatrixXd& e_graph,
                                const refnet::ProjectionParams& psi_lang,
                                const refnet::ProjectionParams& psi_graph, double tau,
                                refnet::Mode mode = refnet::Mode::kTrain,
                                bool symmetric = false) {
  if (&psi_lang == &psi_graph)
    throw DomainError("language and graph projections must be distinct blocks");
  if (psi_lang.out_dim() != psi_graph.out_dim())
    throw DomainError("projections map to different output widths");
  if (e_lang.rows() != e_graph.rows()) throw DomainError("batch sizes differ");
  BimodalLoss r;
  r.z_lang = refnet::project(e_lang, psi_lang, mode, &r.cache_lang);
  r.z_graph = refnet::project(e_graph, psi_graph, mode, &r.cache_graph);
  PairLoss nt = ntxent(r.z_lang, r.z_graph, tau, symmetric);
  r.loss = nt.loss;
  r.grad_lang = refnet::project_backward(nt.grad_u, psi_lang, r.cache_lang, r.psi_lang);
  r.grad_graph = refnet::project_backward(nt.grad_v, psi_graph, r.cache_graph, r.psi_graph);
  return r;
}

}  // namespace subdesc::losses

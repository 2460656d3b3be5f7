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
#include "subdesc/random.hpp"
#include "subdesc/refnet/projection.hpp"
#include "subdesc/tokenizer.hpp"

namespace subdesc::refnet {

using tokenizer::TokenId;

/// Row-major so that looking up one token's embedding is contiguous.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Mean-pooled token embeddings. A masked position p is predicted from
/// the pooled context plus a learned embedding of its descriptor slot:
/// logits_p = (c + slot_embedding[slot(p)]) * head + head_bias.
struct LMEncoderParams {
  RowMatrixXd embedding;       // vocab x d
  RowMatrixXd slot_embedding;  // 23 x d
  MatrixXd head;            // d x vocab
  RowVectorXd head_bias;    // vocab

  int vocab() const { return static_cast<int>(embedding.rows()); }
  int dim() const { return static_cast<int>(embedding.cols()); }

  static LMEncoderParams init(int vocab, int dim, Rng& rng) {
    if (dim < 2) throw DomainError("LM embedding width must be at least 2");
    return {random_matrix(vocab, dim, 1.0, rng),
            random_matrix(static_cast<int>(descriptors::kDescriptorSize), dim, 1.0, rng),
            MatrixXd::Zero(dim, vocab),
            RowVectorXd::Zero(vocab)};
  }

  static LMEncoderParams zeros_like(const LMEncoderParams& p) {
    return {RowMatrixXd::Zero(p.embedding.rows(), p.embedding.cols()),
            RowMatrixXd::Zero(p.slot_embedding.rows(), p.slot_embedding.cols()),
            MatrixXd::Zero(p.head.rows(), p.head.cols()),
            RowVectorXd::Zero(p.head_bias.size())};
  }
};

using LMGrads = LMEncoderParams;

/// Descriptor slot of a position in an encoded sequence, or -1 for
/// BOS, EOS and separators.
inline int slot_at(std::size_t position) {
  if (position == 0) return -1;
  const std::size_t off = (position - 1) % (descriptors::kDescriptorSize + 1);
  return off < descriptors::kDescriptorSize ? static_cast<int>(off) : -1;
}

struct LMOutput {
  RowVectorXd embedding;          // e_lang
  MatrixXd logits;                // masked positions x vocab
  MatrixXd hidden;                // masked positions x d
  std::vector<int> slots;         // slot of each masked position
  std::vector<TokenId> pooled;    // ids averaged into the embedding
};

/// With `with_logits` false only the pooled embedding and the hidden rows
/// are filled, so a caller can apply the head to a whole batch at once.
inline LMOutput lm_encode(const std::vector<TokenId>& ids,
                          const std::vector<std::size_t>& masked_positions,
                          const LMEncoderParams& p, bool with_logits = true) {
  LMOutput out;
  out.embedding = RowVectorXd::Zero(p.dim());
  for (TokenId t : ids) {
    if (t < 0 || t >= p.vocab())
      throw DomainError("token id " + std::to_string(t) + " outside vocabulary");
    if (tokenizer::is_special(t)) continue;
    out.embedding += p.embedding.row(t);
    out.pooled.push_back(t);
  }
  if (out.pooled.empty()) throw DomainError("sequence has no descriptor tokens to pool");
  out.embedding /= static_cast<double>(out.pooled.size());

  const auto m = static_cast<Eigen::Index>(masked_positions.size());
  out.hidden.resize(m, p.dim());
  for (Eigen::Index k = 0; k < m; ++k) {
    const int s = slot_at(masked_positions[static_cast<std::size_t>(k)]);
    if (s < 0) throw DomainError("masked position does not hold a descriptor");
    out.slots.push_back(s);
    out.hidden.row(k) = out.embedding + p.slot_embedding.row(s);
  }
  if (with_logits) out.logits = (out.hidden * p.head).rowwise() + p.head_bias;
  return out;
}

inline LMOutput lm_encode(const tokenizer::MaskedSequence& ms, const LMEncoderParams& p,
                          bool with_logits = true) {
  return lm_encode(ms.ids, ms.positions, p, with_logits);
}

/// Head gradients for stacked hidden rows; returns the gradient w.r.t.
/// those rows.
inline MatrixXd lm_head_backward(const MatrixXd& hidden, const MatrixXd& d_logits,
                                 const LMEncoderParams& p, LMGrads& g) {
  g.head.noalias() += hidden.transpose() * d_logits;
  g.head_bias += d_logits.colwise().sum();
  return d_logits * p.head.transpose();
}

/// Embedding and slot gradients given the gradient w.r.t. the hidden rows.
inline void lm_body_backward(const LMOutput& out, const RowVectorXd& d_embedding,
                             const MatrixXd& d_hidden, LMGrads& g) {
  RowVectorXd dc = d_embedding;
  for (Eigen::Index k = 0; k < d_hidden.rows(); ++k) {
    g.slot_embedding.row(out.slots[static_cast<std::size_t>(k)]) += d_hidden.row(k);
    dc += d_hidden.row(k);
  }
  dc /= static_cast<double>(out.pooled.size());
  for (TokenId t : out.pooled) g.embedding.row(t) += dc;
}

/// Accumulates parameter gradients into `g` given upstream gradients for
/// the embedding and the logits.
inline void lm_backward(const LMOutput& out, const RowVectorXd& d_embedding,
                        const MatrixXd& d_logits, const LMEncoderParams& p, LMGrads& g) {
  const MatrixXd dh = d_logits.rows() > 0 ? lm_head_backward(out.hidden, d_logits, p, g)
                                          : MatrixXd(0, p.dim());
  lm_body_backward(out, d_embedding, dh, g);
}

}  // namespace subdesc::refnet

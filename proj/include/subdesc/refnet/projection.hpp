//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "subdesc/error.hpp"
#include "subdesc/random.hpp"

namespace subdesc::refnet {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

enum class Mode { kTrain, kEval };

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

/// Draws a rows x cols matrix with N(0, scale^2) entries.
inline MatrixXd random_matrix(int rows, int cols, double scale, Rng& rng) {
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

/// Per-feature batch normalisation over the rows of a batch.
struct BatchNorm {
  RowVectorXd gamma, beta, running_mean, running_var;

  static BatchNorm identity(int width) {
    return {RowVectorXd::Ones(width), RowVectorXd::Zero(width),
            RowVectorXd::Zero(width), RowVectorXd::Ones(width)};
  }
};

struct BatchNormCache {
  MatrixXd xhat;
  RowVectorXd mean, var, inv_std;
  Mode mode = Mode::kEval;
};

struct BatchNormGrads {
  RowVectorXd gamma, beta;
};

inline MatrixXd batchnorm_forward(const MatrixXd& z, const BatchNorm& bn, Mode mode,
                                  BatchNormCache& cache) {
  cache.mode = mode;
  if (mode == Mode::kTrain) {
    cache.mean = z.colwise().mean();
    cache.var = (z.rowwise() - cache.mean).array().square().colwise().mean();
  } else {
    cache.mean = bn.running_mean;
    cache.var = bn.running_var;
  }
  cache.inv_std = (cache.var.array() + kBatchNormEps).rsqrt();
  cache.xhat = (z.rowwise() - cache.mean).array().rowwise() * cache.inv_std.array();
  return (cache.xhat.array().rowwise() * bn.gamma.array()).rowwise() + bn.beta.array();
}

inline MatrixXd batchnorm_backward(const MatrixXd& dy, const BatchNorm& bn,
                                   const BatchNormCache& cache, BatchNormGrads& grads) {
  grads.gamma = (dy.array() * cache.xhat.array()).colwise().sum();
  grads.beta = dy.colwise().sum();
  const MatrixXd dxhat = dy.array().rowwise() * bn.gamma.array();
  if (cache.mode == Mode::kEval) return dxhat.array().rowwise() * cache.inv_std.array();
  const double n = static_cast<double>(dy.rows());
  const RowVectorXd sum_dxhat = dxhat.colwise().sum();
  const RowVectorXd sum_dxhat_xhat = (dxhat.array() * cache.xhat.array()).colwise().sum();
  MatrixXd dz = (n * dxhat).rowwise() - sum_dxhat;
  dz.array() -= cache.xhat.array().rowwise() * sum_dxhat_xhat.array();
  return (dz.array().rowwise() * (cache.inv_std.array() / n));
}

/// Running statistics after one training batch; the variance is the
/// unbiased batch estimate.
inline void update_running_stats(BatchNorm& bn, const BatchNormCache& cache, int batch) {
  const double unbias = batch > 1 ? static_cast<double>(batch) / (batch - 1) : 1.0;
  bn.running_mean = (1.0 - kBatchNormMomentum) * bn.running_mean + kBatchNormMomentum * cache.mean;
  bn.running_var =
      (1.0 - kBatchNormMomentum) * bn.running_var + kBatchNormMomentum * unbias * cache.var;
}

/// Linear -> BN -> Linear -> ReLU -> BN, without linear biases.
struct ProjectionParams {
  MatrixXd w1;  // hidden x in
  MatrixXd w2;  // out x hidden
  BatchNorm bn1, bn2;

  int in_dim() const { return static_cast<int>(w1.cols()); }
  int out_dim() const { return static_cast<int>(w2.rows()); }

  static ProjectionParams init(int in, int hidden, int out, Rng& rng) {
    return {random_matrix(hidden, in, std::sqrt(2.0 / in), rng),
            random_matrix(out, hidden, std::sqrt(2.0 / hidden), rng),
            BatchNorm::identity(hidden), BatchNorm::identity(out)};
  }

  static ProjectionParams zeros_like(const ProjectionParams& p) {
    auto zero_bn = [](const BatchNorm& bn) {
      const auto w = bn.gamma.size();
      return BatchNorm{RowVectorXd::Zero(w), RowVectorXd::Zero(w), RowVectorXd::Zero(w),
                       RowVectorXd::Zero(w)};
    };
    return {MatrixXd::Zero(p.w1.rows(), p.w1.cols()), MatrixXd::Zero(p.w2.rows(), p.w2.cols()),
            zero_bn(p.bn1), zero_bn(p.bn2)};
  }
};

struct ProjectionGrads {
  MatrixXd w1, w2;
  BatchNormGrads bn1, bn2;
};

struct ProjectionCache {
  MatrixXd x, z2, a1;
  BatchNormCache c1, c2;
  Mode mode = Mode::kEval;
};

/// Rows of `x` are embeddings. Train mode needs at least two rows.
inline MatrixXd project(const MatrixXd& x, const ProjectionParams& p, Mode mode,
                        ProjectionCache* cache = nullptr) {
  if (x.cols() != p.in_dim())
    throw DomainError("projection input width " + std::to_string(x.cols()) +
                      " does not match " + std::to_string(p.in_dim()));
  if (mode == Mode::kTrain && x.rows() < 2)
    throw DomainError(
        "batch norm in training mode needs a batch of at least 2; use eval mode "
        "for single embeddings");
  ProjectionCache local;
  ProjectionCache& c = cache ? *cache : local;
  c.mode = mode;
  c.x = x;
  c.a1 = batchnorm_forward(x * p.w1.transpose(), p.bn1, mode, c.c1);
  c.z2 = c.a1 * p.w2.transpose();
  return batchnorm_forward(c.z2.cwiseMax(0.0), p.bn2, mode, c.c2);
}

/// Gradient of the loss w.r.t. the input rows; parameter gradients go to
/// `grads`.
inline MatrixXd project_backward(const MatrixXd& dy, const ProjectionParams& p,
                                 const ProjectionCache& c, ProjectionGrads& grads) {
  const MatrixXd dr = batchnorm_backward(dy, p.bn2, c.c2, grads.bn2);
  const MatrixXd dz2 = (c.z2.array() > 0.0).select(dr, 0.0);
  grads.w2 = dz2.transpose() * c.a1;
  const MatrixXd da1 = dz2 * p.w2;
  const MatrixXd dz1 = batchnorm_backward(da1, p.bn1, c.c1, grads.bn1);
  grads.w1 = dz1.transpose() * c.x;
  return dz1 * p.w1;
}

inline void update_running_stats(ProjectionParams& p, const ProjectionCache& c) {
  if (c.mode != Mode::kTrain) return;
  const int n = static_cast<int>(c.x.rows());
  update_running_stats(p.bn1, c.c1, n);
  update_running_stats(p.bn2, c.c2, n);
}

}  // namespace subdesc::refnet

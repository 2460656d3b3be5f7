//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "subdesc/chem/smiles_parser.hpp"
#include "subdesc/refnet/checkpoint.hpp"
#include "subdesc/refnet/trainer.hpp"
#include "support/finite_diff.hpp"
#include "support/oracles.hpp"

namespace {

using namespace subdesc;
using namespace subdesc::refnet;

constexpr double kGradTol = 1e-4;

graphprep::GraphFeatures graph_of(const std::string& smiles) {
  return graphprep::featurize(chem::parse_smiles(smiles));
}

graphprep::GraphFeatures permuted(const graphprep::GraphFeatures& gf, const std::vector<int>& perm) {
  // perm[old] = new index
  graphprep::GraphFeatures out;
  out.nodes.resize(gf.nodes.size());
  for (int i = 0; i < gf.num_nodes(); ++i) out.nodes[perm[i]] = gf.nodes[i];
  for (int k = 0; k < gf.num_edges(); ++k) {
    const int a = perm[gf.edges[k].first], b = perm[gf.edges[k].second];
    out.edges.emplace_back(std::min(a, b), std::max(a, b));
    out.edge_attrs.push_back(gf.edge_attrs[k]);
  }
  return out;
}

std::vector<PreparedMolecule> prepared(const std::vector<std::string>& smiles,
                                       const tokenizer::Vocab& vocab) {
  std::vector<PreparedMolecule> out;
  for (const auto& s : smiles) out.push_back(prepare(s, vocab));
  return out;
}

ModelConfig small_config(int vocab, GraphEncoder encoder) {
  ModelConfig cfg;
  cfg.vocab = vocab;
  cfg.lm_dim = 4;
  cfg.encoder = encoder;
  cfg.gnn_widths = {5, 3};
  cfg.proj_dim = 3;
  cfg.loss.tau = 0.5;
  return cfg;
}

// ------------------------------------------------------------ projection

TEST(Projection, EvalWithIdentityNormIsLinearThenRelu) {
  // With identity normalisation the block reduces to ReLU(W2 W1 e), up to
  // the 1/sqrt(1 + eps) factors.
  Rng rng(1);
  const auto p = ProjectionParams::init(6, 6, 4, rng);
  const MatrixXd e = random_matrix(3, 6, 1.0, rng);
  const MatrixXd expected = (e * p.w1.transpose() * p.w2.transpose()).cwiseMax(0.0);
  const MatrixXd got = project(e, p, Mode::kEval);
  EXPECT_EQ(got.cols(), 4);
  EXPECT_LT((got - expected).norm(), 1e-5 * expected.norm());
}

TEST(Projection, EvalIsPure) {
  Rng rng(2);
  const auto p = ProjectionParams::init(5, 5, 3, rng);
  const auto before = p;
  const MatrixXd e = random_matrix(1, 5, 1.0, rng);
  const MatrixXd a = project(e, p, Mode::kEval);
  const MatrixXd b = project(e, p, Mode::kEval);
  EXPECT_EQ(a, b);
  EXPECT_EQ(p.bn1.running_mean, before.bn1.running_mean);
  EXPECT_EQ(p.bn2.running_var, before.bn2.running_var);
}

TEST(Projection, Errors) {
  Rng rng(3);
  const auto p = ProjectionParams::init(5, 5, 3, rng);
  EXPECT_THROW(project(MatrixXd::Ones(2, 4), p, Mode::kTrain), DomainError);
  EXPECT_THROW(project(MatrixXd::Ones(1, 5), p, Mode::kTrain), DomainError);
  EXPECT_NO_THROW(project(MatrixXd::Ones(1, 5), p, Mode::kEval));
}

TEST(Projection, RunningStatsUseUnbiasedVariance) {
  Rng rng(4);
  auto p = ProjectionParams::init(3, 3, 2, rng);
  const MatrixXd e = random_matrix(4, 3, 1.0, rng);
  ProjectionCache c;
  project(e, p, Mode::kTrain, &c);
  update_running_stats(p, c);
  const MatrixXd z = e * p.w1.transpose();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    const double var = (z.col(j).array() - mean).square().sum() / 3.0;
    EXPECT_NEAR(p.bn1.running_mean(j), 0.1 * mean, 1e-14);
    EXPECT_NEAR(p.bn1.running_var(j), 0.9 + 0.1 * var, 1e-14);
  }
}

TEST(Projection, GradientsMatchFiniteDifferences) {
  for (auto mode : {Mode::kTrain, Mode::kEval}) {
    Rng rng(5);
    auto p = ProjectionParams::init(4, 4, 3, rng);
    p.bn1.gamma.array() += 0.5;
    p.bn2.beta = random_matrix(1, 3, 0.2, rng);
    p.bn1.running_mean = random_matrix(1, 4, 0.2, rng);
    MatrixXd x = random_matrix(6, 4, 1.0, rng);
    const MatrixXd r = random_matrix(6, 3, 1.0, rng);
    ProjectionCache c;
    project(x, p, mode, &c);
    ProjectionGrads g;
    const MatrixXd dx = project_backward(r, p, c, g);
    auto loss = [&] { return (project(x, p, mode).array() * r.array()).sum(); };
    EXPECT_LT(oracle::gradient_error(x, dx, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(p.w1, g.w1, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(p.w2, g.w2, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(p.bn1.gamma, g.bn1.gamma, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(p.bn1.beta, g.bn1.beta, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(p.bn2.gamma, g.bn2.gamma, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(p.bn2.beta, g.bn2.beta, loss), kGradTol);
  }
}

// ------------------------------------------------------------ graph encoders

TEST(Gcn, SingleNodeIsReluOfLinear) {
  Rng rng(6);
  const auto p = GCNParams::init({kNodeInputDim, 7}, rng);
  const auto gf = graph_of("N");
  const RowVectorXd x = node_inputs(gf).row(0);
  const RowVectorXd expected = (x * p.w[0].transpose()).cwiseMax(0.0);
  EXPECT_EQ(gcn_encode(gf, p), expected);
}

TEST(Gcn, PropagationNormalisesWithSelfLoops) {
  const MatrixXd prop = gcn_propagation(graph_of("CCC"));
  // Degrees with self-loops are 2, 3, 2.
  EXPECT_NEAR(prop(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(prop(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(prop(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_EQ(prop(0, 2), 0.0);
  EXPECT_EQ(prop, prop.transpose());
}

TEST(Gcn, SymmetricPairHasEqualStates) {
  Rng rng(7);
  const auto p = GCNParams::init({kNodeInputDim, 6, 6, 4}, rng);
  GCNCache c;
  gcn_encode(graph_of("CC"), p, &c);
  for (const auto& pre : c.pre) EXPECT_EQ(pre.row(0), pre.row(1));
}

TEST(Gcn, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  auto p = GCNParams::init({kNodeInputDim, 6, 5}, rng);
  const auto gf = graph_of("CC(=O)Nc1ccc(O)cc1");
  const RowVectorXd r = random_matrix(1, 5, 1.0, rng);
  GCNCache c;
  gcn_encode(gf, p, &c);
  auto g = GCNParams::zeros_like(p);
  gcn_backward(r, p, c, g);
  auto loss = [&] { return gcn_encode(gf, p).dot(r); };
  for (int k = 0; k < p.layers(); ++k) EXPECT_LT(oracle::gradient_error(p.w[k], g.w[k], loss), kGradTol);
}

TEST(Gin, IsolatedNodeExamples) {
  Rng rng(9);
  auto p = GINParams::init({kNodeInputDim, 5}, rng);
  p.layers[0].b1 = random_matrix(1, 5, 1.0, rng);
  p.layers[0].b2 = random_matrix(1, 5, 1.0, rng);
  const auto gf = graph_of("O");
  const RowVectorXd x = node_inputs(gf).row(0);
  const auto& l = p.layers[0];
  auto mlp = [&](const RowVectorXd& h) -> RowVectorXd {
    return ((h * l.w1.transpose() + l.b1).cwiseMax(0.0)) * l.w2.transpose() + l.b2;
  };
  EXPECT_LT((gin_encode(gf, p) - mlp(x)).norm(), 1e-14);
  p.layers[0].eps = -1.0;
  EXPECT_LT((gin_encode(gf, p) - mlp(RowVectorXd::Zero(x.size()))).norm(), 1e-14);
}

TEST(Gin, GradientMatchesFiniteDifferences) {
  Rng rng(10);
  auto p = GINParams::init({kNodeInputDim, 6, 4}, rng);
  for (auto& l : p.layers) {
    l.eps = 0.3;
    l.b1 = random_matrix(1, l.b1.size(), 0.5, rng);
    l.b2 = random_matrix(1, l.b2.size(), 0.5, rng);
  }
  const auto gf = graph_of("OC(=O)C1CCN(C)CC1");
  const RowVectorXd r = random_matrix(1, 4, 1.0, rng);
  GINCache c;
  gin_encode(gf, p, &c);
  auto g = GINParams::zeros_like(p);
  gin_backward(r, p, c, g);
  auto loss = [&] { return gin_encode(gf, p).dot(r); };
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    auto& l = p.layers[k];
    const auto& gl = g.layers[k];
    EXPECT_LT(oracle::gradient_error(l.w1, gl.w1, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(l.b1, gl.b1, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(l.w2, gl.w2, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(l.b2, gl.b2, loss), kGradTol);
    EXPECT_LT(oracle::gradient_error(l.eps, gl.eps, loss), kGradTol);
  }
}

TEST(GraphEncoders, PermutationInvariant) {
  Rng rng(11);
  const auto gcn = GCNParams::init({kNodeInputDim, 8, 8}, rng);
  auto gin = GINParams::init({kNodeInputDim, 8, 8}, rng);
  gin.layers[0].eps = 0.2;
  for (const auto& smi : oracle::read_lines(oracle::fixture("corpus200.smi"))) {
    const auto gf = graph_of(smi);
    std::vector<int> perm(gf.num_nodes());
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    for (std::size_t i = 1; i < perm.size(); i += 2) std::swap(perm[i], perm[i / 2]);
    const auto pg = permuted(gf, perm);
    EXPECT_LT((gcn_encode(gf, gcn) - gcn_encode(pg, gcn)).cwiseAbs().maxCoeff(), 1e-10) << smi;
    EXPECT_LT((gin_encode(gf, gin) - gin_encode(pg, gin)).cwiseAbs().maxCoeff(), 1e-10) << smi;
  }
}

TEST(GraphEncoders, EmptyGraphRejected) {
  Rng rng(12);
  EXPECT_THROW(gcn_encode(graphprep::GraphFeatures{}, GCNParams::init({kNodeInputDim, 2}, rng)),
               DomainError);
  EXPECT_THROW(gin_encode(graphprep::GraphFeatures{}, GINParams::init({kNodeInputDim, 2}, rng)),
               DomainError);
}

// ------------------------------------------------------------ language model

TEST(LanguageModel, SlotOfPosition) {
  EXPECT_EQ(slot_at(0), -1);
  EXPECT_EQ(slot_at(1), 0);
  EXPECT_EQ(slot_at(23), 22);
  EXPECT_EQ(slot_at(24), -1);
  EXPECT_EQ(slot_at(25), 0);
  EXPECT_EQ(slot_at(49), 0);
}

TEST(LanguageModel, PoolsOnlyDescriptorTokens) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  Rng rng(13);
  const auto p = LMEncoderParams::init(vocab.size(), 6, rng);
  const auto pm = prepare("c1ccccc1CCN", vocab);
  const auto out = lm_encode(pm.tokens.ids, {}, p);
  RowVectorXd expected = RowVectorXd::Zero(6);
  int count = 0;
  for (auto t : pm.tokens.ids)
    if (!tokenizer::is_special(t)) {
      expected += p.embedding.row(t);
      ++count;
    }
  EXPECT_LT((out.embedding - expected / count).norm(), 1e-14);
  EXPECT_EQ(out.logits.rows(), 0);
  EXPECT_THROW(lm_encode({0, 2}, {}, p), DomainError);
  EXPECT_THROW(lm_encode({0, vocab.size(), 2}, {}, p), DomainError);
  EXPECT_THROW(lm_encode(pm.tokens.ids, {0}, p), DomainError);
}

TEST(LanguageModel, GradientMatchesFiniteDifferences) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::uniform(1));
  Rng rng(14);
  auto p = LMEncoderParams::init(vocab.size(), 4, rng);
  p.head = random_matrix(4, vocab.size(), 0.5, rng);
  p.head_bias = random_matrix(1, vocab.size(), 0.5, rng);
  const auto ms = tokenizer::mask_tokens(prepare("CCOC(=O)c1ccccc1", vocab).tokens, 0.3, 99);
  const auto out = lm_encode(ms, p);
  const RowVectorXd r = random_matrix(1, 4, 1.0, rng);
  const MatrixXd rl = random_matrix(out.logits.rows(), vocab.size(), 1.0, rng);
  auto g = LMEncoderParams::zeros_like(p);
  lm_backward(out, r, rl, p, g);
  auto loss = [&] {
    const auto o = lm_encode(ms, p);
    return o.embedding.dot(r) + (o.logits.array() * rl.array()).sum();
  };
  EXPECT_LT(oracle::gradient_error(p.embedding, g.embedding, loss), kGradTol);
  EXPECT_LT(oracle::gradient_error(p.slot_embedding, g.slot_embedding, loss), kGradTol);
  EXPECT_LT(oracle::gradient_error(p.head, g.head, loss), kGradTol);
  EXPECT_LT(oracle::gradient_error(p.head_bias, g.head_bias, loss), kGradTol);
}

// ------------------------------------------------------------ training step

class TrainerTest : public ::testing::Test {
 protected:
  static std::vector<std::string> demo_smiles(std::size_t n) {
    auto all = oracle::read_lines(oracle::fixture("demo64.smi"));
    all.resize(n);
    return all;
  }
};

TEST_F(TrainerTest, FullStepGradientMatchesFiniteDifferences) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::uniform(1));
  const auto batch = prepared({"CCOC(=O)c1ccccc1", "NCCc1c[nH]c2ccc(O)cc12", "CC(C)Cl"}, vocab);
  for (auto encoder : {GraphEncoder::kGcn, GraphEncoder::kGin}) {
    auto m = Model::init(small_config(vocab.size(), encoder), 3);
    Rng rng(15);
    m.lm.head = random_matrix(m.lm.dim(), vocab.size(), 0.5, rng);
    for (auto& l : m.gin.layers) l.eps = 0.1;
    Model grads;
    compute_gradients(m, batch, 21, grads);
    auto loss = [&] {
      Model scratch;
      return compute_gradients(m, batch, 21, scratch).total;
    };
    visit_trainable(
        [&](const std::string& name, auto& param, const auto& grad) {
          EXPECT_LT(oracle::gradient_error(param, grad, loss), kGradTol) << name;
        },
        m, grads);
  }
}

TEST_F(TrainerTest, ZeroGraphWeightsLeaveLanguageLoss) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  auto cfg = small_config(vocab.size(), GraphEncoder::kGcn);
  cfg.loss.alpha = 0.7;
  cfg.loss.beta = 0.0;
  cfg.loss.gamma = 0.0;
  const auto m = Model::init(cfg, 1);
  Model grads;
  const auto r = compute_gradients(m, prepared(demo_smiles(4), vocab), 2, grads);
  EXPECT_EQ(r.total, 0.7 * r.l_lang);
  EXPECT_GT(r.l_graph, 0.0);
  EXPECT_TRUE(grads.gcn.w[0].isZero(0.0));
  EXPECT_TRUE(grads.psi_graph.w1.isZero(0.0));
}

TEST_F(TrainerTest, TiedProjectionsRejected) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  auto cfg = small_config(vocab.size(), GraphEncoder::kGcn);
  cfg.tied_projections = true;
  EXPECT_THROW(Model::init(cfg, 1), DomainError);
  cfg.tied_projections = false;
  cfg.vocab = tokenizer::kSpecialCount;
  EXPECT_THROW(Model::init(cfg, 1), DomainError);
}

TEST_F(TrainerTest, DefaultProjectionWidth) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  ModelConfig cfg;
  cfg.vocab = vocab.size();
  const auto m = Model::init(cfg, 1);
  EXPECT_EQ(m.psi_lang.out_dim(), 64);
  EXPECT_EQ(m.psi_graph.out_dim(), 64);
  EXPECT_EQ(m.psi_lang.w1.rows(), m.psi_lang.in_dim());
  EXPECT_EQ(m.psi_graph.w1.rows(), m.psi_graph.in_dim());
  EXPECT_EQ(cfg.lr, 1e-2);
}

TEST_F(TrainerTest, EightMoleculeLossDecreases) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  const auto batch = prepared(demo_smiles(8), vocab);
  for (auto encoder : {GraphEncoder::kGcn, GraphEncoder::kGin}) {
    ModelConfig cfg;
    cfg.vocab = vocab.size();
    cfg.encoder = encoder;
    auto m = Model::init(cfg, 7);
    // Same masks and views every step, so the objective itself is fixed.
    std::vector<double> totals;
    for (int t = 0; t < 20; ++t) totals.push_back(pretrain_step(m, batch, 7).total);
    int upticks = 0;
    for (std::size_t t = 1; t < totals.size(); ++t) upticks += totals[t] >= totals[t - 1];
    EXPECT_LE(upticks, 2);
    EXPECT_LT(totals.back(), totals.front());
  }
}

TEST_F(TrainerTest, BitIdenticalUnderSameSeed) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  const auto batch = prepared(demo_smiles(6), vocab);
  auto run = [&] {
    ModelConfig cfg;
    cfg.vocab = vocab.size();
    auto m = Model::init(cfg, 11);
    std::vector<LossReport> reports;
    for (int t = 0; t < 5; ++t) reports.push_back(pretrain_step(m, batch, derive_seed(11, {static_cast<std::uint64_t>(t)})));
    return std::pair{reports, model_arrays(m)};
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST_F(TrainerTest, BatchOfOneRejected) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  ModelConfig cfg;
  cfg.vocab = vocab.size();
  auto m = Model::init(cfg, 1);
  EXPECT_THROW(pretrain_step(m, prepared({"CCO"}, vocab), 1), DomainError);
}

TEST_F(TrainerTest, AlignmentInRange) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::defaults());
  ModelConfig cfg;
  cfg.vocab = vocab.size();
  const auto m = Model::init(cfg, 1);
  const auto a = alignment(m, prepared(demo_smiles(5), vocab));
  EXPECT_GE(a.matched, -1.0);
  EXPECT_LE(a.matched, 1.0);
  EXPECT_GE(a.mismatched, -1.0);
  EXPECT_LE(a.mismatched, 1.0);
}

// ------------------------------------------------------------ checkpoint

class CheckpointTest : public ::testing::Test {
 protected:
  void TearDown() override { std::filesystem::remove(path_); }
  std::string path_ = (std::filesystem::temp_directory_path() /
                       ("subdesc_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                        ".bin"))
                          .string();
};

TEST_F(CheckpointTest, RoundTrip) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::uniform(1));
  for (auto encoder : {GraphEncoder::kGcn, GraphEncoder::kGin}) {
    auto m = Model::init(small_config(vocab.size(), encoder), 5);
    m.psi_lang.bn1.running_var.array() += 0.25;
    write_checkpoint(path_, model_arrays(m));
    const auto arrays = read_checkpoint(path_);
    EXPECT_EQ(arrays, model_arrays(m));
    auto fresh = Model::init(small_config(vocab.size(), encoder), 6);
    ASSERT_NE(model_arrays(fresh), arrays);
    restore(fresh, arrays);
    EXPECT_EQ(model_arrays(fresh), arrays);
  }
}

TEST_F(CheckpointTest, HeaderLayout) {
  write_checkpoint(path_, {{"x", {2, 1}, {1.5, -2.0}}});
  std::ifstream in(path_, std::ios::binary);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  // magic, version, count, name length, name, rank, 2 extents, 2 values
  ASSERT_EQ(bytes.size(), 8u + 4 + 4 + 4 + 1 + 4 + 16 + 16);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "SDESCKPT");
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 1);
  EXPECT_EQ(bytes[16], 1);
  EXPECT_EQ(bytes[20], 'x');
  EXPECT_EQ(bytes[21], 2);
  EXPECT_EQ(bytes[25], 2);
  EXPECT_EQ(bytes[33], 1);
  double v = 0.0;
  std::memcpy(&v, bytes.data() + 41, 8);
  EXPECT_EQ(v, 1.5);
}

TEST_F(CheckpointTest, CorruptFilesRejected) {
  write_checkpoint(path_, {{"x", {3}, {1.0, 2.0, 3.0}}});
  std::filesystem::resize_file(path_, std::filesystem::file_size(path_) - 4);
  EXPECT_THROW(read_checkpoint(path_), Error);
  {
    std::ofstream out(path_, std::ios::binary);
    out << "NOTACKPT";
  }
  EXPECT_THROW(read_checkpoint(path_), Error);
  EXPECT_THROW(read_checkpoint(path_ + ".missing"), Error);
}

TEST_F(CheckpointTest, RestoreRejectsOtherArchitecture) {
  const auto vocab = tokenizer::build_vocab(descriptors::CapTable::uniform(1));
  const auto gcn = Model::init(small_config(vocab.size(), GraphEncoder::kGcn), 5);
  auto gin = Model::init(small_config(vocab.size(), GraphEncoder::kGin), 5);
  EXPECT_THROW(restore(gin, model_arrays(gcn)), Error);
}

}  // namespace

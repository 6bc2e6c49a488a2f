// Copyright 2026 The tabsem Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "tabsem/error.hpp"
#include "tabsem/model.hpp"
#include "tabsem/synth.hpp"
#include "tabsem/train.hpp"

namespace tabsem {
namespace {

ModelConfig Small() {
  ModelConfig c;
  c.width = 16;
  c.layers = 2;
  c.heads = 2;
  c.embed_dim = 8;
  return c;
}

ModelParameters Perturbed(TaskMode mode, std::uint64_t seed) {
  ModelParameters p(ModelDims::For(mode, Small()), seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (double& v : p.buffer().values) v += normal(rng);
  return p;
}

Mat RandomRows(Eigen::Index rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  return Mat::NullaryExpr(rows, static_cast<Eigen::Index>(cols),
                          [&] { return normal(rng); });
}

ModelInput CFInput(const ModelDims& d, Eigen::Index cells, std::uint64_t seed) {
  return {RandomRows(1, d.field_features, seed),
          RandomRows(cells, d.cell_features, seed + 1)};
}

TEST(FuseInputs, CFShapesAndTypes) {
  const ModelParameters p(ModelDims::For(TaskMode::kCF, Small()), 1);
  const ModelDims& d = p.dims();
  EXPECT_EQ(FuseInputs(p, CFInput(d, 0, 1)).tokens.rows(), 1);
  const FusedSequence s = FuseInputs(p, CFInput(d, 3, 1));
  EXPECT_EQ(s.tokens.rows(), 4);
  EXPECT_EQ(s.types, (std::vector<TokenType>{TokenType::kField, TokenType::kCell,
                                             TokenType::kCell, TokenType::kCell}));
}

TEST(FuseInputs, ZeroInputsGiveBiases) {
  const ModelParameters p = Perturbed(TaskMode::kCF, 2);
  const ModelDims& d = p.dims();
  ModelInput in{Mat::Zero(1, static_cast<Eigen::Index>(d.field_features)),
                Mat::Zero(2, static_cast<Eigen::Index>(d.cell_features))};
  const FusedSequence s = FuseInputs(p, in);
  const auto fb = p.buffer().M(p.layout().field_b);
  const auto cb = p.buffer().M(p.layout().cell_b);
  EXPECT_LT((s.tokens.row(0) - fb.row(0)).norm(), 1e-15);
  EXPECT_LT((s.tokens.row(2) - cb.row(0)).norm(), 1e-15);
}

TEST(FuseInputs, TableTokenIsMeanOfFields) {
  const ModelParameters p = Perturbed(TaskMode::kChart, 3);
  ModelInput in{RandomRows(4, p.dims().field_features, 9), Mat()};
  const FusedSequence s = FuseInputs(p, in);
  ASSERT_EQ(s.tokens.rows(), 5);
  EXPECT_EQ(s.types[0], TokenType::kTable);
  const Eigen::RowVectorXd mean = s.tokens.bottomRows(4).colwise().mean();
  EXPECT_LT((s.tokens.row(0) - mean).norm(), 1e-12);
}

TEST(FuseInputs, DimensionMismatch) {
  const ModelParameters p(ModelDims::For(TaskMode::kCF, Small()), 1);
  ModelInput in{Mat::Zero(1, 3), Mat()};
  try {
    FuseInputs(p, in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Encode, LengthOne) {
  const ModelParameters p = Perturbed(TaskMode::kCF, 4);
  const Mat out = Encode(p, FuseInputs(p, CFInput(p.dims(), 0, 5)));
  EXPECT_EQ(out.rows(), 1);
  EXPECT_EQ(static_cast<std::size_t>(out.cols()), p.dims().width);
}

TEST(Encode, PermutationEquivariant) {
  const ModelParameters p = Perturbed(TaskMode::kCF, 5);
  ModelInput in = CFInput(p.dims(), 4, 6);
  const Mat a = Encode(p, FuseInputs(p, in));
  ModelInput swapped = in;
  swapped.cell_rows.row(0) = in.cell_rows.row(3);
  swapped.cell_rows.row(3) = in.cell_rows.row(0);
  const Mat b = Encode(p, FuseInputs(p, swapped));
  EXPECT_LT((a.row(0) - b.row(0)).norm(), 1e-10);
  EXPECT_LT((a.row(1) - b.row(4)).norm(), 1e-10);
  EXPECT_LT((a.row(4) - b.row(1)).norm(), 1e-10);
  EXPECT_LT((a.row(2) - b.row(2)).norm(), 1e-10);
}

TEST(Encode, IdenticalCellsIdenticalOutputs) {
  const ModelParameters p = Perturbed(TaskMode::kCF, 6);
  ModelInput in = CFInput(p.dims(), 3, 7);
  in.cell_rows.row(2) = in.cell_rows.row(0);
  const Mat out = Encode(p, FuseInputs(p, in));
  EXPECT_LT((out.row(1) - out.row(3)).norm(), 1e-12);
}

TEST(Forward, ShapesAndZeroHeads) {
  const ModelParameters p(ModelDims::For(TaskMode::kCF, Small()), 7);
  const Logits l = Forward(p, CFInput(p.dims(), 5, 8));
  EXPECT_EQ(l.ref.rows(), 5);
  EXPECT_EQ(l.intent.size(), 2);
  EXPECT_EQ(l.focus.size(), 7);
  EXPECT_EQ(l.op.size(), 12);
  EXPECT_EQ(l.intent.norm() + l.focus.norm() + l.op.norm() + l.ref.norm(), 0.0);
  EXPECT_DOUBLE_EQ(Sigmoid(l.op(0)), 0.5);
}

TEST(Forward, LongInputsStayFinite) {
  const ModelParameters p = Perturbed(TaskMode::kCF, 8);
  ModelInput in = CFInput(p.dims(), 64, 9);
  in.cell_rows *= 1e3;
  const Logits l = Forward(p, in);
  EXPECT_TRUE(l.ref.allFinite());
  EXPECT_TRUE(l.op.allFinite());
}

TEST(Forward, ChartAxesAndDuplicates) {
  const ModelParameters p = Perturbed(TaskMode::kChart, 9);
  ModelInput in{RandomRows(3, p.dims().field_features, 10), Mat()};
  const Logits l = Forward(p, in);
  EXPECT_EQ(l.ref.rows(), 3);
  EXPECT_EQ(l.ref.cols(), 2);
  EXPECT_EQ(l.intent.size(), 4);
  EXPECT_EQ(l.focus.size(), 6);
  EXPECT_EQ(l.op.size(), 4);
  ModelInput dup = in;
  dup.field_rows.conservativeResize(4, Eigen::NoChange);
  dup.field_rows.row(3) = in.field_rows.row(1);
  const Logits ld = Forward(p, dup);
  EXPECT_LT((ld.ref.row(1) - ld.ref.row(3)).norm(), 1e-12);
}

Labels LabelsLike(const Logits& l, double value) {
  return {Vector::Constant(l.intent.size(), value), Vector::Constant(l.focus.size(), value),
          Vector::Constant(l.op.size(), value),
          Mat::Constant(l.ref.rows(), l.ref.cols(), value)};
}

TEST(Loss, HandValues) {
  EXPECT_NEAR(WeightedBce(0.0, 1.0, 1.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(WeightedBce(0.0, 0.0, 5.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(WeightedBce(0.0, 1.0, 3.0, 2.0), 6.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(WeightedBce(50.0, 1.0, 1.0), 0.0, 1e-20);
  EXPECT_TRUE(std::isfinite(WeightedBce(-800.0, 1.0, 1.0)));
}

TEST(Loss, ZeroLogitsAndWeightedSum) {
  const ModelParameters p(ModelDims::For(TaskMode::kCF, Small()), 1);
  const Logits l = Forward(p, CFInput(p.dims(), 3, 2));
  const PosWeights pw = PosWeights::Ones(p.dims());
  const LossBreakdown b = ComputeLoss(l, LabelsLike(l, 1.0), LossWeights{}, pw);
  EXPECT_NEAR(b.intent, std::log(2.0), 1e-15);
  EXPECT_NEAR(b.total, b.intent + b.focus + b.op + b.ref, 1e-15);
  EXPECT_NEAR(b.total, 4.0 * std::log(2.0), 1e-14);
  const LossBreakdown w = ComputeLoss(l, LabelsLike(l, 1.0), {2.0, 0.0, 1.0, 0.5}, pw);
  EXPECT_NEAR(w.total, 2 * b.intent + b.op + 0.5 * b.ref, 1e-14);
}

TEST(Loss, SaturatedLogitsGoToZero) {
  const ModelParameters p(ModelDims::For(TaskMode::kCF, Small()), 1);
  Logits l = Forward(p, CFInput(p.dims(), 2, 3));
  Labels y = LabelsLike(l, 0.0);
  y.intent(0) = 1.0;
  y.ref(1, 0) = 1.0;
  auto saturate = [](auto& logits, const auto& labels) {
    logits = (labels.array() * 2.0 - 1.0) * 60.0;
  };
  saturate(l.intent, y.intent);
  saturate(l.focus, y.focus);
  saturate(l.op, y.op);
  saturate(l.ref, y.ref);
  EXPECT_LT(ComputeLoss(l, y, LossWeights{}, PosWeights::Ones(p.dims())).total, 1e-20);
}

TEST(Loss, ShapeMismatch) {
  const ModelParameters p(ModelDims::For(TaskMode::kCF, Small()), 1);
  const Logits l = Forward(p, CFInput(p.dims(), 2, 3));
  Labels y = LabelsLike(l, 0.0);
  y.ref = Mat::Zero(5, 1);
  try {
    ComputeLoss(l, y, LossWeights{}, PosWeights::Ones(p.dims()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (TaskMode mode : {TaskMode::kCF, TaskMode::kChart}) {
    const testing::GradCheckResult r = testing::GradCheck(mode, 8, 1, 11);
    EXPECT_LT(r.norm_relative, 1e-6);
    EXPECT_LT(r.worst_relative, 1e-4);
  }
}

TEST(Gradient, IndependentOfThreadCount) {
  const ModelParameters p = Perturbed(TaskMode::kCF, 12);
  std::vector<TrainingExample> batch(7);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].input = CFInput(p.dims(), 1 + static_cast<Eigen::Index>(i % 4), 100 + i);
    batch[i].labels = LabelsLike(Forward(p, batch[i].input), static_cast<double>(i % 2));
  }
  std::vector<const TrainingExample*> ptrs;
  for (const auto& ex : batch) ptrs.push_back(&ex);
  ParamBuffer g1, g3;
  const PosWeights pw = PosWeights::Ones(p.dims());
  const LossBreakdown l1 = BatchLossAndGradient(p, ptrs, {}, pw, &g1, 1);
  const LossBreakdown l3 = BatchLossAndGradient(p, ptrs, {}, pw, &g3, 3);
  EXPECT_EQ(l1.total, l3.total);
  EXPECT_EQ(g1.values, g3.values);
  EXPECT_EQ(BatchLoss(p, ptrs, {}, pw).total, l1.total);
}

TEST(Parameters, JsonRoundTripAndChecksum) {
  const ModelParameters p = Perturbed(TaskMode::kChart, 13);
  const ModelParameters q = ModelParameters::FromJson(p.ToJson());
  EXPECT_EQ(q.dims(), p.dims());
  EXPECT_EQ(q.buffer().values, p.buffer().values);
  EXPECT_EQ(q.Checksum(), p.Checksum());
  EXPECT_NE(Perturbed(TaskMode::kChart, 14).Checksum(), p.Checksum());
  EXPECT_TRUE(p.AllFinite());
}

TEST(Parameters, SeededInitIsReproducible) {
  const ModelDims d = ModelDims::For(TaskMode::kCF, Small());
  EXPECT_EQ(ModelParameters(d, 5).Checksum(), ModelParameters(d, 5).Checksum());
  EXPECT_NE(ModelParameters(d, 5).Checksum(), ModelParameters(d, 6).Checksum());
}

TEST(Config, Validation) {
  ModelConfig c = Small();
  c.heads = 3;
  EXPECT_THROW(c.Validate(), Error);
  const ModelConfig back = ModelConfigFromJson(ModelConfigToJson(Small()), ModelConfig{});
  EXPECT_EQ(back.width, 16u);
  EXPECT_EQ(back.heads, 2u);
}

TEST(Split, SevenOneTwo) {
  std::vector<Table> tables;
  for (int i = 0; i < 100; ++i) {
    tables.push_back(MakeTable("t" + std::to_string(i), {"a"}, {{"1"}}));
  }
  const Split s = SplitTables(tables, 7);
  EXPECT_EQ(s.train.size(), 70u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 20u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  std::reverse(tables.begin(), tables.end());
  const Split r = SplitTables(tables, 7);
  for (std::size_t k = 0; k < s.test.size(); ++k) {
    EXPECT_EQ(tables[r.test[k]].id, "t" + std::to_string(s.test[k]));
  }
}

TEST(Train, DeterministicAndImproving) {
  SynthSpec spec;
  spec.n_tables = 120;
  const Corpus corpus = GenerateSynthetic(spec);
  TrainOptions opts;
  opts.config = Small();
  opts.config.max_epochs = 3;
  opts.config.threads = 2;
  opts.embedding.dim = opts.config.embed_dim;
  const TrainedModel a = Train(corpus, opts);
  const TrainedModel b = Train(corpus, opts);
  EXPECT_EQ(a.cf.Checksum(), b.cf.Checksum());
  EXPECT_EQ(a.chart.Checksum(), b.chart.Checksum());
  ASSERT_GE(a.cf_history.val_loss.size(), 2u);
  EXPECT_LT(a.cf_history.val_loss[a.cf_history.best_epoch], a.cf_history.val_loss[0]);
  EXPECT_LT(a.chart_history.val_loss[a.chart_history.best_epoch],
            a.chart_history.val_loss[0]);
  const TrainedModel c = TrainedModel::FromJson(a.ToJson());
  EXPECT_EQ(c.cf.Checksum(), a.cf.Checksum());
  EXPECT_EQ(c.config.max_epochs, 3u);
}

TEST(Train, TooSmallCorpus) {
  SynthSpec spec;
  spec.n_tables = 3;
  TrainOptions opts;
  opts.config = Small();
  opts.embedding.dim = opts.config.embed_dim;
  try {
    Train(GenerateSynthetic(spec), opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorpusTooSmall);
  }
}

}  // namespace
}  // namespace tabsem

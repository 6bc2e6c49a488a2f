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

#include "eval_fixtures.hpp"
#include "tabsem/error.hpp"
#include "tabsem/evalkit.hpp"

namespace tabsem {
namespace {

using O = OperationCF;
using P = MatchPolicy;

TEST(FrozenFixtures, HandComputedMetrics) {
  std::string log;
  EXPECT_EQ(testing::CheckFrozenFixtures(&log), 0) << log;
}

TEST(Matches, Policies) {
  const CFAnswer gold{O::kBetween, {ParamValue::Number(1), ParamValue::Number(5)}};
  const CFAnswer swapped{O::kBetween, {ParamValue::Number(5), ParamValue::Number(1)}};
  const CFAnswer other_op{O::kColorScale, gold.parameters};
  const CFAnswer other_params{O::kBetween, {ParamValue::Number(1), ParamValue::Number(6)}};
  EXPECT_TRUE(Matches(swapped, gold, P::kComplete));
  EXPECT_FALSE(Matches(other_op, gold, P::kComplete));
  EXPECT_TRUE(Matches(other_op, gold, P::kParametersOnly));
  EXPECT_TRUE(Matches(other_params, gold, P::kOperationOnly));
  EXPECT_FALSE(Matches(other_params, gold, P::kParametersOnly));
  const CFAnswer text{O::kEqualContains, {ParamValue::Text("5")}};
  const CFAnswer number{O::kEqualContains, {ParamValue::Number(5)}};
  EXPECT_FALSE(Matches(text, number, P::kComplete));
}

TEST(Matches, Charts) {
  const ChartAnswer gold{ChartType::kBar, {0}, {1, 2}};
  EXPECT_TRUE(Matches(ChartAnswer{ChartType::kBar, {0}, {2, 1}}, gold));
  EXPECT_FALSE(Matches(ChartAnswer{ChartType::kLine, {0}, {1, 2}}, gold));
  EXPECT_FALSE(Matches(ChartAnswer{ChartType::kBar, {0}, {1}}, gold));
}

TEST(RecallAtK, Errors) {
  CFPredictions pred{{"a#0", {}}};
  CFGold gold{{"b#0", {}}};
  try {
    RecallAtK(pred, gold, 1, P::kComplete);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKeyMismatch);
  }
  try {
    RecallAtK({}, {}, 1, P::kComplete);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyRecordSet);
  }
  EXPECT_THROW(ChartRecallAtK({}, {}, 1), Error);
}

TEST(RecallAtK, MonotoneInK) {
  const testing::EvalFixture a = testing::LoadEvalFixture("eval_cf.json");
  double prev = 0.0;
  for (std::size_t k = 0; k <= 5; ++k) {
    const double r = RecallAtK(a.cf_pred, a.cf_gold, k, P::kComplete);
    EXPECT_GE(r, prev);
    prev = r;
  }
  EXPECT_EQ(RecallAtK(a.cf_pred, a.cf_gold, 0, P::kComplete), 0.0);
}

TEST(RankSemantics, CFOrdersValidFocuses) {
  Logits l;
  l.intent = Vector::Zero(2);
  l.intent(1) = 2.0;
  l.focus = Vector::LinSpaced(7, -3.0, 3.0);
  const SemanticsPrediction num = RankSemanticsCF(l, FieldType::kNumeric);
  EXPECT_EQ(num.intents, (std::vector<int>{1, 0}));
  EXPECT_EQ(num.focuses, (std::vector<int>{6, 5, 4, 3, 2, 1, 0}));
  EXPECT_EQ(num.pairs.size(), 14u);
  EXPECT_EQ(num.pairs[0], std::make_pair(1, 6));
  const SemanticsPrediction str = RankSemanticsCF(l, FieldType::kString);
  for (int d : str.focuses) {
    EXPECT_TRUE(FocusValidFor(static_cast<DataFocusCF>(d), FieldType::kString));
  }
  EXPECT_EQ(str.focuses.size(), 4u);
}

TEST(RankSemantics, GoldOf) {
  const CFSemantics s{UserIntentCF::kCom, {DataFocusCF::kBla, DataFocusCF::kRag}};
  const SemanticsGold g = GoldOf(s);
  EXPECT_EQ(g.intents, std::vector<int>{1});
  EXPECT_EQ(g.focuses, (std::vector<int>{1, 5}));
  const ChartSemantics c{{UserIntentChart::kTtr}, {DataFocusChart::kFmt}};
  EXPECT_EQ(GoldOf(c).intents, std::vector<int>{3});
}

TEST(MetricsReport, KeysAndFormatting) {
  const testing::EvalFixture a = testing::LoadEvalFixture("eval_cf.json");
  const testing::EvalFixture b = testing::LoadEvalFixture("eval_chart.json");
  EvalData d;
  d.cf_pred = a.cf_pred;
  d.cf_gold = a.cf_gold;
  for (const auto& [key, unused] : a.cf_gold) {
    d.cf_sem_pred[key] = {{0, 1}, {1}, {{0, 1}}};
    d.cf_sem_gold[key] = {{0}, {1}};
  }
  d.chart_pred = b.chart_pred;
  d.chart_gold = b.chart_gold;
  for (const auto& [key, unused] : b.chart_gold) {
    d.chart_sem_pred[key] = {{2}, {0}, {{2, 0}}};
    d.chart_sem_gold[key] = {{1}, {0}};
  }
  const nlohmann::json r = MetricsReport(d);
  EXPECT_EQ(r["cf"]["fields"], 4);
  EXPECT_DOUBLE_EQ(r["cf"]["overall"]["R@1"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(r["cf"]["operation"]["R@1"].get<double>(), 0.75);
  EXPECT_EQ(r["cf"]["per_operation_R@1"]["IsError"], "n/a");
  EXPECT_DOUBLE_EQ(r["cf"]["semantics"]["R@1"]["overall"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r["chart"]["per_type"]["line"]["P@1"].get<double>(), 0.5);
  EXPECT_EQ(r["chart"]["per_type"]["pie"]["P@1"], "n/a");
  EXPECT_DOUBLE_EQ(r["chart"]["semantics"]["R@1"]["intent"].get<double>(), 0.0);
  const std::string text = FormatReport(r);
  EXPECT_NE(text.find("0.5000"), std::string::npos);
  EXPECT_NE(text.find("n/a"), std::string::npos);
  EXPECT_EQ(r.dump(), MetricsReport(d).dump());
}

}  // namespace
}  // namespace tabsem

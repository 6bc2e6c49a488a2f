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

#ifndef TABSEM_EVALKIT_HPP_
#define TABSEM_EVALKIT_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tabsem/corpus.hpp"
#include "tabsem/featurize.hpp"
#include "tabsem/model.hpp"
#include "tabsem/recommend.hpp"
#include "tabsem/train.hpp"

namespace tabsem {

enum class MatchPolicy { kOperationOnly, kParametersOnly, kComplete };

const char* MatchPolicyName(MatchPolicy p);

// One CF answer: predicted or gold.
struct CFAnswer {
  OperationCF operation = OperationCF::kIsError;
  std::vector<ParamValue> parameters;
};

struct ChartAnswer {
  ChartType chart_type = ChartType::kBar;
  std::vector<std::size_t> x_fields;
  std::vector<std::size_t> y_fields;
};

// Keyed by field ("table#field") or table id. Predictions are ranked.
using CFPredictions = std::map<std::string, std::vector<CFAnswer>>;
using CFGold = std::map<std::string, std::vector<CFAnswer>>;
using ChartPredictions = std::map<std::string, std::vector<ChartAnswer>>;
using ChartGold = std::map<std::string, std::vector<ChartAnswer>>;

std::string FieldKey(const std::string& table_id, std::size_t field_index);

bool Matches(const CFAnswer& predicted, const CFAnswer& gold,
             MatchPolicy policy);
// Type and x/y field sets must all agree.
bool Matches(const ChartAnswer& predicted, const ChartAnswer& gold);

// Fraction of fields with a top-k prediction matching a gold answer.
// Throws KeyMismatch unless both maps have the same keys, EmptyRecordSet
// when they are empty.
double RecallAtK(const CFPredictions& predictions, const CFGold& gold,
                 std::size_t k, MatchPolicy policy);

// Share of fields whose gold has `op` where the top-1 prediction completely
// matches a gold answer of `op`; nullopt when there are none.
std::optional<double> PerOperationRecall(const CFPredictions& predictions,
                                         const CFGold& gold, OperationCF op);

double ChartRecallAtK(const ChartPredictions& predictions,
                      const ChartGold& gold, std::size_t k);

struct RecallPrecision {
  std::optional<double> recall;     // over tables whose gold has the type
  std::optional<double> precision;  // over tables whose top-1 is the type
};

RecallPrecision ChartRecallPrecision(const ChartPredictions& predictions,
                                     const ChartGold& gold, ChartType type);

// Ranked labels. Intents and focuses are enum values as ints.
struct SemanticsPrediction {
  std::vector<int> intents;
  std::vector<int> focuses;
  std::vector<std::pair<int, int>> pairs;
};

struct SemanticsGold {
  std::vector<int> intents;
  std::vector<int> focuses;
};

struct SemanticsRecall {
  double overall = 0.0;  // a gold (intent, focus) pair within the top k
  double intent = 0.0;   // top-1 intent is gold
  double focus = 0.0;    // a gold focus within the top k
};

SemanticsRecall SemanticsRecallAtK(
    const std::map<std::string, SemanticsPrediction>& predictions,
    const std::map<std::string, SemanticsGold>& gold, std::size_t k);

// Rankings from raw head outputs. CF intents are exclusive (softmax), chart
// intents independent (sigmoid); pairs rank by the product of the two.
SemanticsPrediction RankSemanticsCF(const Logits& logits, FieldType type);
SemanticsPrediction RankSemanticsChart(const Logits& logits);

SemanticsGold GoldOf(const CFSemantics& s);
SemanticsGold GoldOf(const ChartSemantics& s);

// Everything collected while scoring a model on held-out tables.
struct EvalData {
  CFPredictions cf_pred;
  CFGold cf_gold;
  std::map<std::string, SemanticsPrediction> cf_sem_pred;
  std::map<std::string, SemanticsGold> cf_sem_gold;
  ChartPredictions chart_pred;
  ChartGold chart_gold;
  std::map<std::string, SemanticsPrediction> chart_sem_pred;
  std::map<std::string, SemanticsGold> chart_sem_gold;
  // Emitted chart recommendations violating the x-axis rules.
  std::size_t chart_emitted = 0;
  std::size_t chart_axis_violations = 0;
};

// Runs both task models on the examples of `tables` (indices into the
// corpus the dataset was built from).
EvalData CollectEval(const TrainedModel& model, const Corpus& corpus,
                     const Dataset& dataset,
                     const std::vector<std::size_t>& tables,
                     const RecommendOptions& options);

// Metrics report. Undefined per-type values are the string "n/a".
nlohmann::json MetricsReport(const EvalData& data);

// Aligned plain-text rendering of MetricsReport.
std::string FormatReport(const nlohmann::json& report);

}  // namespace tabsem

#endif  // TABSEM_EVALKIT_HPP_

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

#ifndef TABSEM_RECOMMEND_HPP_
#define TABSEM_RECOMMEND_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabsem/featurize.hpp"
#include "tabsem/model.hpp"
#include "tabsem/record.hpp"
#include "tabsem/semantics.hpp"
#include "tabsem/train.hpp"

namespace tabsem {

struct CFRecommendation {
  std::string table_id;
  std::size_t field_index = 0;
  OperationCF operation = OperationCF::kIsError;
  std::vector<ParamValue> parameters;      // ascending for multi-bucket ops
  std::vector<std::uint16_t> provenance;   // CandidateSource bits per param
  double score = 0.0;
  CFSemantics semantics;
  std::string explanation;
};

struct ChartRecommendation {
  std::string table_id;
  ChartType chart_type = ChartType::kBar;
  std::vector<std::size_t> x_fields;
  std::vector<std::size_t> y_fields;
  double score = 0.0;
  ChartSemantics semantics;
  std::string explanation;
};

struct RecommendOptions {
  std::size_t k = 3;
  // Parameters taken by multi-bucket operations (2..4).
  std::size_t bucket_parameters = 2;
  // false: every operation and every type-valid focus's candidates.
  bool use_semantics = true;
  IntentFocusMap map = IntentFocusMap::Default();
};

// intent = argmax; focuses = sigmoid > 0.5 among focuses valid for the
// field type, else the best valid one.
CFSemantics DecodeSemanticsCF(const Logits& logits, FieldType type);

// Everything the CF ranking needs once the model has run.
struct CFScoringProblem {
  std::array<double, kNumOperations> op_prob{};
  std::array<bool, kNumOperations> allowed{};
  std::vector<ParamCandidate> candidates;  // only anchored candidates
  std::vector<double> candidate_prob;      // max sigmoid over anchors
  CFSemantics semantics;
};

CFScoringProblem BuildCFProblem(const Field& field,
                                std::span<const CellSignature> sigs,
                                std::span<const std::size_t> sampled,
                                const Logits& logits,
                                const RecommendOptions& options,
                                const Vocabulary& vocab);

// Number of parameters `op` takes under `options`.
std::size_t ParameterCount(OperationCF op, const RecommendOptions& options);

// P(o) times the product of P(r) in parameter order.
double RecordScore(double op_prob, std::span<const double> param_probs);

// Orders by score (desc), then operation, then parameters (ascending).
bool RecommendationBefore(const CFRecommendation& a,
                          const CFRecommendation& b);

// Top-k executable records; best-first over candidate combinations.
std::vector<CFRecommendation> RankCF(const CFScoringProblem& problem,
                                     const Field& field,
                                     const RecommendOptions& options);

// Same result by enumerating every combination. Reference for tests.
std::vector<CFRecommendation> RankCFExhaustive(
    const CFScoringProblem& problem, const Field& field,
    const RecommendOptions& options);

// Throws UntrainedModel and IndexOutOfRange.
std::vector<CFRecommendation> RecommendCF(const TrainedModel& model,
                                          const Table& table,
                                          std::size_t field_index,
                                          const RecommendOptions& options);

// With precomputed features and model inputs.
std::vector<CFRecommendation> RecommendCFFromInput(
    const TrainedModel& model, const Table& table, std::size_t field_index,
    const CFFeatures& features, const ModelInput& input,
    const RecommendOptions& options);

inline constexpr double kDecodeThreshold = 0.5;

// Throws UntrainedModel, EmptyTable and NoNumericField.
std::vector<ChartRecommendation> RecommendChart(
    const TrainedModel& model, const Table& table, std::size_t k);

std::vector<ChartRecommendation> RecommendChartFromInput(
    const TrainedModel& model, const Table& table, const ModelInput& input,
    std::size_t k);

std::string Explain(const CFRecommendation& rec, const Field& field);
std::string Explain(const ChartRecommendation& rec, const Table& table);

std::string SourceNames(std::uint16_t sources);
nlohmann::json ToJson(const CFRecommendation& rec, bool with_explanation);
nlohmann::json ToJson(const ChartRecommendation& rec, bool with_explanation);

}  // namespace tabsem

#endif  // TABSEM_RECOMMEND_HPP_

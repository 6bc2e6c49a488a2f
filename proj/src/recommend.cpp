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

#include "tabsem/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "tabsem/error.hpp"
#include "tabsem/executor.hpp"

namespace tabsem {

namespace {

// Relative slack when deciding whether the search may stop at a tie.
constexpr double kTieSlack = 1e-12;

bool ParamsLess(const std::vector<ParamValue>& a,
                const std::vector<ParamValue>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      ParamLess);
}

// Builds the record for a chosen set of candidate indices, or nothing when
// it is not executable.
std::optional<CFRecommendation> MakeRecord(const CFScoringProblem& problem,
                                           const Field& field, OperationCF op,
                                           std::vector<std::size_t> chosen) {
  std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
    return ParamLess(problem.candidates[a].value, problem.candidates[b].value);
  });
  CFRecommendation rec;
  rec.field_index = field.index;
  rec.operation = op;
  std::vector<double> probs;
  for (std::size_t c : chosen) {
    rec.parameters.push_back(problem.candidates[c].value);
    rec.provenance.push_back(problem.candidates[c].sources);
    probs.push_back(problem.candidate_prob[c]);
  }
  if (!IsExecutable(op, rec.parameters, field)) return std::nullopt;
  rec.score = RecordScore(problem.op_prob[static_cast<std::size_t>(op)], probs);
  rec.semantics = problem.semantics;
  return rec;
}

std::vector<std::size_t> AcceptedCandidates(const CFScoringProblem& problem,
                                            OperationCF op) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < problem.candidates.size(); ++i) {
    if (AcceptsCandidate(op, problem.candidates[i])) out.push_back(i);
  }
  return out;
}

void SortAndTruncate(std::vector<CFRecommendation>* recs, std::size_t k) {
  std::sort(recs->begin(), recs->end(), RecommendationBefore);
  if (recs->size() > k) recs->resize(k);
}

// Best-first enumeration of m-subsets of `probs` (sorted descending) in
// non-increasing product order.
class CombinationQueue {
 public:
  CombinationQueue(const std::vector<double>& probs, std::size_t m)
      : probs_(probs), m_(m) {
    if (m_ <= probs_.size()) {
      std::vector<std::size_t> first(m_);
      std::iota(first.begin(), first.end(), 0);
      Push(std::move(first));
    }
  }

  bool empty() const { return heap_.empty(); }
  double top_product() const { return heap_.top().first; }

  std::vector<std::size_t> Pop() {
    std::vector<std::size_t> t = heap_.top().second;
    heap_.pop();
    for (std::size_t j = 0; j < m_; ++j) {
      const std::size_t limit = j + 1 < m_ ? t[j + 1] : probs_.size();
      if (t[j] + 1 < limit) {
        std::vector<std::size_t> next = t;
        ++next[j];
        Push(std::move(next));
      }
    }
    return t;
  }

 private:
  void Push(std::vector<std::size_t> t) {
    if (!seen_.insert(t).second) return;
    double p = 1.0;
    for (std::size_t i : t) p *= probs_[i];
    heap_.emplace(p, std::move(t));
  }

  struct Cmp {
    bool operator()(const std::pair<double, std::vector<std::size_t>>& a,
                    const std::pair<double, std::vector<std::size_t>>& b)
        const {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    }
  };

  const std::vector<double>& probs_;
  std::size_t m_;
  std::priority_queue<std::pair<double, std::vector<std::size_t>>,
                      std::vector<std::pair<double, std::vector<std::size_t>>>,
                      Cmp>
      heap_;
  std::set<std::vector<std::size_t>> seen_;
};

void ForEachCombination(std::size_t n, std::size_t m,
                        const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (m > n) return;
  std::vector<std::size_t> t(m);
  std::iota(t.begin(), t.end(), 0);
  while (true) {
    fn(t);
    std::size_t j = m;
    while (j > 0 && t[j - 1] == n - m + j - 1) --j;
    if (j == 0) return;
    ++t[j - 1];
    for (std::size_t i = j; i < m; ++i) t[i] = t[i - 1] + 1;
  }
}

std::string JoinParams(const std::vector<ParamValue>& params,
                       const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) out += sep;
    out += params[i].ToString();
  }
  return out;
}

const char* FocusPhrase(DataFocusCF d) {
  switch (d) {
    case DataFocusCF::kErr: return "error values";
    case DataFocusCF::kBla: return "blank values";
    case DataFocusCF::kMea: return "meaningless values";
    case DataFocusCF::kEmp: return "empirical values";
    case DataFocusCF::kRak: return "rank-aware values";
    case DataFocusCF::kRag: return "range-aware values";
    case DataFocusCF::kFre: return "frequent values";
  }
  return "values";
}

std::string FieldList(const Table& table, const std::vector<std::size_t>& idx) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0) out += i + 1 == idx.size() ? " and " : ", ";
    out += "\"" + table.field(idx[i]).header + "\"";
  }
  return out;
}

template <typename E>
std::vector<E> DecodeMultiHot(const Vector& logits) {
  std::vector<E> out;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (Sigmoid(logits(i)) > kDecodeThreshold) out.push_back(static_cast<E>(i));
  }
  if (out.empty() && logits.size() > 0) {
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    out.push_back(static_cast<E>(best));
  }
  return out;
}

}  // namespace

CFSemantics DecodeSemanticsCF(const Logits& logits, FieldType type) {
  CFSemantics s;
  Eigen::Index best = 0;
  logits.intent.maxCoeff(&best);
  s.intent = static_cast<UserIntentCF>(best);
  std::optional<std::size_t> arg;
  for (std::size_t d = 0; d < kNumFocusesCF; ++d) {
    const auto focus = static_cast<DataFocusCF>(d);
    if (!FocusValidFor(focus, type)) continue;
    const double z = logits.focus(static_cast<Eigen::Index>(d));
    if (Sigmoid(z) > kDecodeThreshold) s.focuses.push_back(focus);
    if (!arg || z > logits.focus(static_cast<Eigen::Index>(*arg))) arg = d;
  }
  if (s.focuses.empty() && arg) {
    s.focuses.push_back(static_cast<DataFocusCF>(*arg));
  }
  return s;
}

std::size_t ParameterCount(OperationCF op, const RecommendOptions& options) {
  if (IsMultiBucket(op)) {
    return std::clamp<std::size_t>(options.bucket_parameters, MinArity(op),
                                   kMaxBucketParameters);
  }
  return MinArity(op);
}

double RecordScore(double op_prob, std::span<const double> param_probs) {
  double s = op_prob;
  for (double p : param_probs) s *= p;
  return s;
}

bool RecommendationBefore(const CFRecommendation& a,
                          const CFRecommendation& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.operation != b.operation) return a.operation < b.operation;
  return ParamsLess(a.parameters, b.parameters);
}

CFScoringProblem BuildCFProblem(const Field& field,
                                std::span<const CellSignature> sigs,
                                std::span<const std::size_t> sampled,
                                const Logits& logits,
                                const RecommendOptions& options,
                                const Vocabulary& vocab) {
  CFScoringProblem p;
  p.semantics = DecodeSemanticsCF(logits, field.ftype);
  std::array<double, kNumOperations> op_logits{};
  for (std::size_t o = 0; o < kNumOperations; ++o) {
    op_logits[o] = logits.op(static_cast<Eigen::Index>(o));
  }
  std::vector<ParamCandidate> candidates;
  if (options.use_semantics) {
    const std::vector<OperationCF> ops = CandidateOperations(
        p.semantics.intent, p.semantics.focuses, options.map);
    op_logits = FilterOperationScores(op_logits, ops);
    candidates = CandidateParameters(field, sigs, p.semantics.focuses, vocab);
  } else {
    candidates = AllCandidates(field, sigs, vocab);
  }
  for (std::size_t o = 0; o < kNumOperations; ++o) {
    p.allowed[o] = std::isfinite(op_logits[o]);
    p.op_prob[o] = p.allowed[o] ? Sigmoid(op_logits[o]) : 0.0;
  }
  for (ParamCandidate& c : candidates) {
    const std::vector<std::size_t> anchors =
        AnchorPositions(c, field, sampled);
    if (anchors.empty()) continue;
    double best = 0.0;
    for (std::size_t k : anchors) {
      best = std::max(best, Sigmoid(logits.ref(static_cast<Eigen::Index>(k), 0)));
    }
    p.candidates.push_back(std::move(c));
    p.candidate_prob.push_back(best);
  }
  return p;
}

std::vector<CFRecommendation> RankCF(const CFScoringProblem& problem,
                                     const Field& field,
                                     const RecommendOptions& options) {
  std::vector<CFRecommendation> all;
  if (options.k == 0) return all;
  for (std::size_t o = 0; o < kNumOperations; ++o) {
    if (!problem.allowed[o]) continue;
    const auto op = static_cast<OperationCF>(o);
    const std::size_t m = ParameterCount(op, options);
    std::vector<std::size_t> accepted = AcceptedCandidates(problem, op);
    std::stable_sort(accepted.begin(), accepted.end(),
                     [&](std::size_t a, std::size_t b) {
                       return problem.candidate_prob[a] >
                              problem.candidate_prob[b];
                     });
    std::vector<double> probs;
    for (std::size_t c : accepted) probs.push_back(problem.candidate_prob[c]);
    CombinationQueue queue(probs, m);
    std::vector<CFRecommendation> found;
    double kth = 0.0;
    while (!queue.empty()) {
      const double product = queue.top_product();
      if (found.size() >= options.k && product < kth * (1.0 - kTieSlack)) {
        break;
      }
      const std::vector<std::size_t> t = queue.Pop();
      std::vector<std::size_t> chosen;
      for (std::size_t i : t) chosen.push_back(accepted[i]);
      if (auto rec = MakeRecord(problem, field, op, std::move(chosen))) {
        found.push_back(std::move(*rec));
        if (found.size() == options.k) kth = product;
      }
    }
    for (CFRecommendation& r : found) all.push_back(std::move(r));
  }
  SortAndTruncate(&all, options.k);
  return all;
}

std::vector<CFRecommendation> RankCFExhaustive(
    const CFScoringProblem& problem, const Field& field,
    const RecommendOptions& options) {
  std::vector<CFRecommendation> all;
  for (std::size_t o = 0; o < kNumOperations; ++o) {
    if (!problem.allowed[o]) continue;
    const auto op = static_cast<OperationCF>(o);
    const std::vector<std::size_t> accepted = AcceptedCandidates(problem, op);
    ForEachCombination(accepted.size(), ParameterCount(op, options),
                       [&](const std::vector<std::size_t>& t) {
                         std::vector<std::size_t> chosen;
                         for (std::size_t i : t) chosen.push_back(accepted[i]);
                         if (auto rec = MakeRecord(problem, field, op,
                                                   std::move(chosen))) {
                           all.push_back(std::move(*rec));
                         }
                       });
  }
  SortAndTruncate(&all, options.k);
  return all;
}

std::vector<CFRecommendation> RecommendCFFromInput(
    const TrainedModel& model, const Table& table, std::size_t field_index,
    const CFFeatures& features, const ModelInput& input,
    const RecommendOptions& options) {
  if (!model.has_cf) {
    throw Error(ErrorCode::kUntrainedModel, "model has no CF parameters");
  }
  const Field& field = table.field(field_index);
  const Logits logits = Forward(model.cf, input);
  RecommendOptions effective = options;
  effective.use_semantics = options.use_semantics && !model.config.no_semantics;
  const CFScoringProblem problem =
      BuildCFProblem(field, features.cell_sigs, features.sampled, logits,
                     effective, model.signatures.vocab);
  std::vector<CFRecommendation> recs = RankCF(problem, field, effective);
  for (CFRecommendation& r : recs) {
    r.table_id = table.id;
    r.explanation = Explain(r, field);
  }
  return recs;
}

std::vector<CFRecommendation> RecommendCF(const TrainedModel& model,
                                          const Table& table,
                                          std::size_t field_index,
                                          const RecommendOptions& options) {
  if (!model.has_cf) {
    throw Error(ErrorCode::kUntrainedModel, "model has no CF parameters");
  }
  CFFeatures f = FeaturizeField(table, field_index, model.MakeContext());
  const ModelInput input = std::move(f.input);
  return RecommendCFFromInput(model, table, field_index, f, input, options);
}

std::vector<ChartRecommendation> RecommendChartFromInput(
    const TrainedModel& model, const Table& table, const ModelInput& input,
    std::size_t k) {
  if (!model.has_chart) {
    throw Error(ErrorCode::kUntrainedModel, "model has no chart parameters");
  }
  if (table.n_fields() == 0) {
    throw Error(ErrorCode::kEmptyTable, "table '" + table.id + "' is empty");
  }
  std::vector<std::size_t> numeric;
  for (const Field& f : table.fields) {
    if (f.ftype == FieldType::kNumeric) numeric.push_back(f.index);
  }
  if (numeric.empty()) {
    throw Error(ErrorCode::kNoNumericField,
                "table '" + table.id + "' has no numeric field");
  }
  const Logits logits = Forward(model.chart, input);
  ChartSemantics decoded;
  decoded.intents = DecodeMultiHot<UserIntentChart>(logits.intent);
  decoded.focuses = DecodeMultiHot<DataFocusChart>(logits.focus);
  auto px = [&](std::size_t i) {
    return Sigmoid(logits.ref(static_cast<Eigen::Index>(i), 0));
  };
  auto py = [&](std::size_t i) {
    return Sigmoid(logits.ref(static_cast<Eigen::Index>(i), 1));
  };

  std::vector<ChartRecommendation> out;
  for (std::size_t t = 0; t < kNumChartTypes; ++t) {
    const auto type = static_cast<ChartType>(t);
    ChartRecommendation rec;
    rec.table_id = table.id;
    rec.chart_type = type;
    double score = Sigmoid(logits.op(static_cast<Eigen::Index>(t)));
    const std::vector<FieldType> x_types = AllowedXTypes(type);
    if (!x_types.empty()) {
      std::optional<std::size_t> best;
      for (const Field& f : table.fields) {
        if (std::find(x_types.begin(), x_types.end(), f.ftype) ==
            x_types.end()) {
          continue;
        }
        if (!best || px(f.index) > px(*best)) best = f.index;
      }
      if (!best) continue;
      rec.x_fields.push_back(*best);
      score *= px(*best);
    }
    std::optional<std::size_t> top_y;
    for (std::size_t i : numeric) {
      if (!rec.x_fields.empty() && rec.x_fields[0] == i) continue;
      if (py(i) > kDecodeThreshold) rec.y_fields.push_back(i);
      if (!top_y || py(i) > py(*top_y)) top_y = i;
    }
    if (rec.y_fields.empty()) {
      if (!top_y) continue;
      rec.y_fields.push_back(*top_y);
    }
    double mean_y = 0.0;
    for (std::size_t i : rec.y_fields) mean_y += py(i);
    mean_y /= static_cast<double>(rec.y_fields.size());
    rec.score = score * mean_y;
    const bool x_date = !rec.x_fields.empty() &&
                        table.field(rec.x_fields[0]).ftype ==
                            FieldType::kDateTime;
    rec.semantics.intents = ChartIntents(type, x_date);
    rec.semantics.focuses = decoded.focuses;
    rec.explanation = Explain(rec, table);
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ChartRecommendation& a,
                      const ChartRecommendation& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.chart_type < b.chart_type;
                   });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<ChartRecommendation> RecommendChart(const TrainedModel& model,
                                                const Table& table,
                                                std::size_t k) {
  if (!model.has_chart) {
    throw Error(ErrorCode::kUntrainedModel, "model has no chart parameters");
  }
  ChartFeatures f = FeaturizeTable(table, model.MakeContext());
  return RecommendChartFromInput(model, table, f.input, k);
}

std::string Explain(const CFRecommendation& rec, const Field& field) {
  const std::vector<ParamValue>& p = rec.parameters;
  const std::string first = p.empty() ? "" : p.front().ToString();
  std::string action;
  switch (rec.operation) {
    case OperationCF::kIsError:
      action = "highlight the error cells of this field";
      break;
    case OperationCF::kIsBlank:
      action = "highlight the blank cells of this field";
      break;
    case OperationCF::kIsDuplicate:
      action = "highlight the duplicated values of this field";
      break;
    case OperationCF::kLessGreaterThan:
      action = "highlight values less or greater than " + first;
      break;
    case OperationCF::kTopBottomK:
      action = "highlight the top " + first + " records of this " +
               (field.ftype == FieldType::kNumeric ? "numeric " : "") +
               "field";
      break;
    case OperationCF::kBetween:
      action = "highlight values between " + JoinParams(p, " and ");
      break;
    case OperationCF::kEqualContains:
      action = "highlight cells equal to \"" + first + "\"";
      break;
    case OperationCF::kEqualSet:
      action = "highlight cells equal to one of " + JoinParams(p, ", ");
      break;
    case OperationCF::kDataBar:
      action = "draw data bars scaled from " + JoinParams(p, " to ");
      break;
    case OperationCF::kColorScale:
      action = "apply a color scale from " + JoinParams(p, " to ");
      break;
    case OperationCF::kIconSet:
      action = "assign icons to buckets split at " + JoinParams(p, ", ");
      break;
    case OperationCF::kPartitionSet:
      action = "partition the values at " + JoinParams(p, ", ");
      break;
  }
  const CFSemantics& s = rec.semantics;
  DataFocusCF focus = s.focuses.empty() ? DataFocusCF::kRag : s.focuses[0];
  const IntentFocusMap map = IntentFocusMap::Default();
  for (DataFocusCF d : s.focuses) {
    const auto* ops = map.Find(s.intent, d);
    if (ops != nullptr &&
        std::find(ops->begin(), ops->end(), rec.operation) != ops->end()) {
      focus = d;
      break;
    }
  }
  const std::string verb = s.intent == UserIntentCF::kDet ? "Detect" : "Compare";
  return verb + " " + FocusPhrase(focus) + ": " + action;
}

std::string Explain(const ChartRecommendation& rec, const Table& table) {
  const std::string y = FieldList(table, rec.y_fields);
  const std::string x = FieldList(table, rec.x_fields);
  switch (rec.chart_type) {
    case ChartType::kLine:
      if (!rec.x_fields.empty() &&
          table.field(rec.x_fields[0]).ftype == FieldType::kDateTime) {
        return "Show the time trend of " + y + " over " + x +
               " with a line chart";
      }
      return "Compare " + y + " along " + x + " with a line chart";
    case ChartType::kBar:
      return "Compare " + y + " across the categories of " + x +
             " with a bar chart";
    case ChartType::kScatter:
      return "Show the relationship between " + x + " and " + y +
             " with a scatter chart";
    case ChartType::kPie:
      return "Show the composition of " + y + " with a pie chart";
  }
  return "";
}

std::string SourceNames(std::uint16_t sources) {
  static constexpr std::pair<std::uint16_t, const char*> kNames[] = {
      {kSourceCell, "cell"},
      {kSourceMean, "mean"},
      {kSourceMidpoint, "midpoint"},
      {kSourceRoundMultiple, "round_multiple"},
      {kSourceRankK, "rank_k"},
      {kSourceEmpirical, "empirical"},
      {kSourceBlank, "blank"},
      {kSourceError, "error"},
      {kSourceDuplicate, "duplicate"},
      {kSourceComplement, "complement"},
      {kSourceCommonRank, "common_rank"},
      {kSourceCommonFrequency, "common_frequency"},
      {kSourceMeaningless, "meaningless"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if ((sources & bit) == 0) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

nlohmann::json ToJson(const CFRecommendation& rec, bool with_explanation) {
  nlohmann::json params = nlohmann::json::array();
  nlohmann::json prov = nlohmann::json::array();
  for (std::size_t i = 0; i < rec.parameters.size(); ++i) {
    params.push_back(ParamToJson(rec.parameters[i]));
    prov.push_back(SourceNames(rec.provenance[i]));
  }
  nlohmann::json focuses = nlohmann::json::array();
  for (DataFocusCF d : rec.semantics.focuses) focuses.push_back(FocusName(d));
  nlohmann::json j = {
      {"table_id", rec.table_id},
      {"field_index", rec.field_index},
      {"operation", OperationName(rec.operation)},
      {"parameters", std::move(params)},
      {"provenance", std::move(prov)},
      {"score", rec.score},
      {"semantics",
       {{"intent", IntentName(rec.semantics.intent)},
        {"focuses", std::move(focuses)}}}};
  if (with_explanation) j["explanation"] = rec.explanation;
  return j;
}

nlohmann::json ToJson(const ChartRecommendation& rec, bool with_explanation) {
  nlohmann::json intents = nlohmann::json::array();
  for (UserIntentChart u : rec.semantics.intents) intents.push_back(IntentName(u));
  nlohmann::json focuses = nlohmann::json::array();
  for (DataFocusChart d : rec.semantics.focuses) focuses.push_back(FocusName(d));
  nlohmann::json j = {{"table_id", rec.table_id},
                      {"chart_type", ChartTypeName(rec.chart_type)},
                      {"x_fields", rec.x_fields},
                      {"y_fields", rec.y_fields},
                      {"score", rec.score},
                      {"semantics",
                       {{"intents", std::move(intents)},
                        {"focuses", std::move(focuses)}}}};
  if (with_explanation) j["explanation"] = rec.explanation;
  return j;
}

}  // namespace tabsem

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

#include "tabsem/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "tabsem/error.hpp"

namespace tabsem {

namespace {

template <typename A, typename B>
void CheckKeys(const std::map<std::string, A>& a,
               const std::map<std::string, B>& b) {
  if (a.empty() && b.empty()) {
    throw Error(ErrorCode::kEmptyRecordSet, "nothing to evaluate");
  }
  bool same = a.size() == b.size();
  for (auto ia = a.begin(), ib = b.begin(); same && ia != a.end();
       ++ia, ++ib) {
    same = ia->first == ib->first;
  }
  if (!same) {
    throw Error(ErrorCode::kKeyMismatch,
                "predictions and gold are keyed differently");
  }
}

std::vector<std::size_t> Sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool Contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Indices of `scores` by descending score, ties by index.
std::vector<int> RankDesc(const std::vector<double>& scores) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return idx;
}

SemanticsPrediction RankFrom(const std::vector<double>& intent_p,
                             const std::vector<double>& focus_p,
                             const std::vector<bool>& focus_ok) {
  SemanticsPrediction out;
  out.intents = RankDesc(intent_p);
  for (int d : RankDesc(focus_p)) {
    if (focus_ok[d]) out.focuses.push_back(d);
  }
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> score;
  for (int u = 0; u < static_cast<int>(intent_p.size()); ++u) {
    for (int d : out.focuses) {
      pairs.emplace_back(u, d);
      score.push_back(intent_p[u] * focus_p[d]);
    }
  }
  for (int i : RankDesc(score)) out.pairs.push_back(pairs[i]);
  return out;
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

nlohmann::json OrNa(const std::optional<double>& v) {
  if (!v) return "n/a";
  return *v;
}

std::string Show(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return Fmt(v.get<double>());
  return v.dump();
}

}  // namespace

const char* MatchPolicyName(MatchPolicy p) {
  switch (p) {
    case MatchPolicy::kOperationOnly: return "operation_only";
    case MatchPolicy::kParametersOnly: return "parameters_only";
    case MatchPolicy::kComplete: return "complete";
  }
  return "?";
}

std::string FieldKey(const std::string& table_id, std::size_t field_index) {
  return table_id + "#" + std::to_string(field_index);
}

bool Matches(const CFAnswer& predicted, const CFAnswer& gold,
             MatchPolicy policy) {
  const bool op = predicted.operation == gold.operation;
  const bool params =
      ParamMultisetEquals(predicted.parameters, gold.parameters);
  switch (policy) {
    case MatchPolicy::kOperationOnly: return op;
    case MatchPolicy::kParametersOnly: return params;
    case MatchPolicy::kComplete: return op && params;
  }
  return false;
}

bool Matches(const ChartAnswer& predicted, const ChartAnswer& gold) {
  return predicted.chart_type == gold.chart_type &&
         Sorted(predicted.x_fields) == Sorted(gold.x_fields) &&
         Sorted(predicted.y_fields) == Sorted(gold.y_fields);
}

double RecallAtK(const CFPredictions& predictions, const CFGold& gold,
                 std::size_t k, MatchPolicy policy) {
  CheckKeys(predictions, gold);
  std::size_t hit = 0;
  for (const auto& [key, preds] : predictions) {
    const auto& golds = gold.at(key);
    const std::size_t n = std::min(k, preds.size());
    bool found = false;
    for (std::size_t i = 0; i < n && !found; ++i) {
      for (const CFAnswer& g : golds) {
        if (Matches(preds[i], g, policy)) {
          found = true;
          break;
        }
      }
    }
    hit += found;
  }
  return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

std::optional<double> PerOperationRecall(const CFPredictions& predictions,
                                         const CFGold& gold, OperationCF op) {
  CheckKeys(predictions, gold);
  std::size_t total = 0, hit = 0;
  for (const auto& [key, golds] : gold) {
    const bool has = std::any_of(golds.begin(), golds.end(),
                                 [&](const CFAnswer& g) {
                                   return g.operation == op;
                                 });
    if (!has) continue;
    ++total;
    const auto& preds = predictions.at(key);
    if (preds.empty()) continue;
    for (const CFAnswer& g : golds) {
      if (g.operation == op && Matches(preds[0], g, MatchPolicy::kComplete)) {
        ++hit;
        break;
      }
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(total);
}

double ChartRecallAtK(const ChartPredictions& predictions,
                      const ChartGold& gold, std::size_t k) {
  CheckKeys(predictions, gold);
  std::size_t hit = 0;
  for (const auto& [key, preds] : predictions) {
    const auto& golds = gold.at(key);
    const std::size_t n = std::min(k, preds.size());
    bool found = false;
    for (std::size_t i = 0; i < n && !found; ++i) {
      for (const ChartAnswer& g : golds) {
        if (Matches(preds[i], g)) {
          found = true;
          break;
        }
      }
    }
    hit += found;
  }
  return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

RecallPrecision ChartRecallPrecision(const ChartPredictions& predictions,
                                     const ChartGold& gold, ChartType type) {
  CheckKeys(predictions, gold);
  std::size_t r_total = 0, r_hit = 0, p_total = 0, p_hit = 0;
  for (const auto& [key, golds] : gold) {
    const auto& preds = predictions.at(key);
    bool top_matches = false;
    if (!preds.empty()) {
      for (const ChartAnswer& g : golds) {
        if (Matches(preds[0], g)) top_matches = true;
      }
    }
    const bool gold_has = std::any_of(
        golds.begin(), golds.end(),
        [&](const ChartAnswer& g) { return g.chart_type == type; });
    if (gold_has) {
      ++r_total;
      if (top_matches && preds[0].chart_type == type) ++r_hit;
    }
    if (!preds.empty() && preds[0].chart_type == type) {
      ++p_total;
      if (top_matches) ++p_hit;
    }
  }
  RecallPrecision out;
  if (r_total > 0) out.recall = static_cast<double>(r_hit) / r_total;
  if (p_total > 0) out.precision = static_cast<double>(p_hit) / p_total;
  return out;
}

SemanticsRecall SemanticsRecallAtK(
    const std::map<std::string, SemanticsPrediction>& predictions,
    const std::map<std::string, SemanticsGold>& gold, std::size_t k) {
  CheckKeys(predictions, gold);
  std::size_t overall = 0, intent = 0, focus = 0;
  for (const auto& [key, p] : predictions) {
    const SemanticsGold& g = gold.at(key);
    if (!p.intents.empty() && Contains(g.intents, p.intents[0])) ++intent;
    for (std::size_t i = 0; i < std::min(k, p.focuses.size()); ++i) {
      if (Contains(g.focuses, p.focuses[i])) {
        ++focus;
        break;
      }
    }
    for (std::size_t i = 0; i < std::min(k, p.pairs.size()); ++i) {
      if (Contains(g.intents, p.pairs[i].first) &&
          Contains(g.focuses, p.pairs[i].second)) {
        ++overall;
        break;
      }
    }
  }
  const double n = static_cast<double>(predictions.size());
  return {overall / n, intent / n, focus / n};
}

SemanticsPrediction RankSemanticsCF(const Logits& logits, FieldType type) {
  std::vector<double> intent(static_cast<std::size_t>(logits.intent.size()));
  const double mx = logits.intent.maxCoeff();
  double z = 0.0;
  for (std::size_t i = 0; i < intent.size(); ++i) {
    intent[i] = std::exp(logits.intent(static_cast<Eigen::Index>(i)) - mx);
    z += intent[i];
  }
  for (double& v : intent) v /= z;
  std::vector<double> focus(static_cast<std::size_t>(logits.focus.size()));
  std::vector<bool> ok(focus.size());
  for (std::size_t d = 0; d < focus.size(); ++d) {
    focus[d] = Sigmoid(logits.focus(static_cast<Eigen::Index>(d)));
    ok[d] = FocusValidFor(static_cast<DataFocusCF>(d), type);
  }
  return RankFrom(intent, focus, ok);
}

SemanticsPrediction RankSemanticsChart(const Logits& logits) {
  std::vector<double> intent(static_cast<std::size_t>(logits.intent.size()));
  for (std::size_t i = 0; i < intent.size(); ++i) {
    intent[i] = Sigmoid(logits.intent(static_cast<Eigen::Index>(i)));
  }
  std::vector<double> focus(static_cast<std::size_t>(logits.focus.size()));
  for (std::size_t d = 0; d < focus.size(); ++d) {
    focus[d] = Sigmoid(logits.focus(static_cast<Eigen::Index>(d)));
  }
  return RankFrom(intent, focus, std::vector<bool>(focus.size(), true));
}

SemanticsGold GoldOf(const CFSemantics& s) {
  SemanticsGold g;
  g.intents.push_back(static_cast<int>(s.intent));
  for (DataFocusCF d : s.focuses) g.focuses.push_back(static_cast<int>(d));
  return g;
}

SemanticsGold GoldOf(const ChartSemantics& s) {
  SemanticsGold g;
  for (UserIntentChart u : s.intents) g.intents.push_back(static_cast<int>(u));
  for (DataFocusChart d : s.focuses) g.focuses.push_back(static_cast<int>(d));
  return g;
}

EvalData CollectEval(const TrainedModel& model, const Corpus& corpus,
                     const Dataset& dataset,
                     const std::vector<std::size_t>& tables,
                     const RecommendOptions& options) {
  const std::set<std::size_t> wanted(tables.begin(), tables.end());
  EvalData out;
  if (model.has_cf) {
    for (const CFExample& ex : dataset.cf) {
      if (!wanted.count(ex.table)) continue;
      const Table& table = corpus.tables[ex.table];
      const Field& field = table.fields[ex.field_index];
      const std::string key = FieldKey(table.id, ex.field_index);
      auto& preds = out.cf_pred[key];
      for (const CFRecommendation& r : RecommendCFFromInput(
               model, table, ex.field_index, ex.features, ex.example.input,
               options)) {
        preds.push_back({r.operation, r.parameters});
      }
      auto& golds = out.cf_gold[key];
      for (const AnalysisRecord& g : ex.gold) {
        golds.push_back({g.operation, g.parameters});
      }
      const Logits logits = Forward(model.cf, ex.example.input);
      out.cf_sem_pred[key] = RankSemanticsCF(logits, field.ftype);
      out.cf_sem_gold[key] = GoldOf(ex.semantics);
    }
  }
  if (model.has_chart) {
    for (const ChartExample& ex : dataset.chart) {
      if (!wanted.count(ex.table)) continue;
      const Table& table = corpus.tables[ex.table];
      auto& preds = out.chart_pred[table.id];
      try {
        for (const ChartRecommendation& r :
             RecommendChartFromInput(model, table, ex.example.input,
                                     options.k)) {
          preds.push_back({r.chart_type, r.x_fields, r.y_fields});
          ++out.chart_emitted;
          const std::vector<FieldType> allowed = AllowedXTypes(r.chart_type);
          bool ok = allowed.empty() ? r.x_fields.empty()
                                    : r.x_fields.size() == 1;
          if (ok && !allowed.empty()) {
            const FieldType t = table.fields[r.x_fields[0]].ftype;
            ok = std::find(allowed.begin(), allowed.end(), t) != allowed.end();
          }
          out.chart_axis_violations += !ok;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoNumericField) throw;
      }
      auto& golds = out.chart_gold[table.id];
      for (const AnalysisRecord& g : ex.gold) {
        golds.push_back({g.chart_type, g.x_fields, g.y_fields});
      }
      const Logits logits = Forward(model.chart, ex.example.input);
      out.chart_sem_pred[table.id] = RankSemanticsChart(logits);
      out.chart_sem_gold[table.id] = GoldOf(ex.semantics);
    }
  }
  return out;
}

nlohmann::json MetricsReport(const EvalData& d) {
  nlohmann::json report = nlohmann::json::object();
  if (!d.cf_pred.empty()) {
    nlohmann::json cf;
    cf["fields"] = d.cf_pred.size();
    for (std::size_t k : {1, 3}) {
      const std::string s = "R@" + std::to_string(k);
      cf["overall"][s] = RecallAtK(d.cf_pred, d.cf_gold, k, MatchPolicy::kComplete);
      cf["operation"][s] =
          RecallAtK(d.cf_pred, d.cf_gold, k, MatchPolicy::kOperationOnly);
      cf["parameter"][s] =
          RecallAtK(d.cf_pred, d.cf_gold, k, MatchPolicy::kParametersOnly);
    }
    nlohmann::json per_op = nlohmann::json::object();
    for (std::size_t o = 0; o < kNumOperations; ++o) {
      const auto op = static_cast<OperationCF>(o);
      per_op[OperationName(op)] =
          OrNa(PerOperationRecall(d.cf_pred, d.cf_gold, op));
    }
    cf["per_operation_R@1"] = std::move(per_op);
    for (std::size_t k : {1, 3}) {
      const SemanticsRecall s = SemanticsRecallAtK(d.cf_sem_pred, d.cf_sem_gold, k);
      const std::string key = "R@" + std::to_string(k);
      cf["semantics"][key] = {{"overall", s.overall},
                              {"intent", s.intent},
                              {"focus", s.focus}};
    }
    report["cf"] = std::move(cf);
  }
  if (!d.chart_pred.empty()) {
    nlohmann::json chart;
    chart["tables"] = d.chart_pred.size();
    chart["overall"]["R@1"] = ChartRecallAtK(d.chart_pred, d.chart_gold, 1);
    chart["overall"]["R@3"] = ChartRecallAtK(d.chart_pred, d.chart_gold, 3);
    nlohmann::json per_type = nlohmann::json::object();
    for (std::size_t t = 0; t < kNumChartTypes; ++t) {
      const auto type = static_cast<ChartType>(t);
      const RecallPrecision rp =
          ChartRecallPrecision(d.chart_pred, d.chart_gold, type);
      per_type[ChartTypeName(type)] = {{"R@1", OrNa(rp.recall)},
                                       {"P@1", OrNa(rp.precision)}};
    }
    chart["per_type"] = std::move(per_type);
    const SemanticsRecall s =
        SemanticsRecallAtK(d.chart_sem_pred, d.chart_sem_gold, 1);
    chart["semantics"]["R@1"] = {{"overall", s.overall},
                                 {"intent", s.intent},
                                 {"focus", s.focus}};
    chart["emitted"] = d.chart_emitted;
    chart["axis_violations"] = d.chart_axis_violations;
    report["chart"] = std::move(chart);
  }
  return report;
}

std::string FormatReport(const nlohmann::json& report) {
  std::ostringstream out;
  auto row = [&](const std::string& label, const std::vector<std::string>& cols) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-22s", label.c_str());
    out << buf;
    for (const std::string& c : cols) {
      std::snprintf(buf, sizeof(buf), "%10s", c.c_str());
      out << buf;
    }
    out << '\n';
  };
  if (report.contains("cf")) {
    const auto& cf = report["cf"];
    out << "Conditional formatting (" << cf["fields"].get<std::size_t>()
        << " fields)\n";
    row("", {"R@1", "R@3"});
    for (const char* name : {"overall", "operation", "parameter"}) {
      row(name, {Show(cf[name]["R@1"]), Show(cf[name]["R@3"])});
    }
    out << '\n';
    row("operation", {"R@1"});
    for (const auto& [op, v] : cf["per_operation_R@1"].items()) {
      row(op, {Show(v)});
    }
    out << '\n';
    row("semantics", {"overall", "intent", "focus"});
    for (const char* k : {"R@1", "R@3"}) {
      const auto& s = cf["semantics"][k];
      row(k, {Show(s["overall"]), Show(s["intent"]), Show(s["focus"])});
    }
  }
  if (report.contains("chart")) {
    const auto& ch = report["chart"];
    if (report.contains("cf")) out << '\n';
    out << "Charts (" << ch["tables"].get<std::size_t>() << " tables)\n";
    row("", {"R@1", "R@3"});
    row("overall", {Show(ch["overall"]["R@1"]), Show(ch["overall"]["R@3"])});
    out << '\n';
    row("chart type", {"R@1", "P@1"});
    for (const auto& [type, v] : ch["per_type"].items()) {
      row(type, {Show(v["R@1"]), Show(v["P@1"])});
    }
    out << '\n';
    row("semantics", {"overall", "intent", "focus"});
    const auto& s = ch["semantics"]["R@1"];
    row("R@1", {Show(s["overall"]), Show(s["intent"]), Show(s["focus"])});
  }
  return out.str();
}

}  // namespace tabsem

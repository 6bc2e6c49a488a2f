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

#include "tabsem/record.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tabsem/error.hpp"
#include "tabsem/signatures.hpp"
#include "tabsem/table.hpp"

namespace tabsem {

namespace {

constexpr std::array<const char*, kNumOperations> kOperationNames = {
    "IsError",    "IsBlank",      "IsDuplicate", "LessGreaterThan",
    "TopBottomK", "Between",      "EqualContains", "EqualSet",
    "DataBar",    "ColorScale",   "IconSet",     "PartitionSet"};

constexpr std::array<const char*, kNumChartTypes> kChartNames = {
    "bar", "line", "scatter", "pie"};

const char* ParamKindName(ParamKind k) {
  switch (k) {
    case ParamKind::kNumber: return "number";
    case ParamKind::kText: return "text";
    case ParamKind::kBlank: return "blank";
    case ParamKind::kError: return "error";
    case ParamKind::kDuplicate: return "duplicate";
  }
  return "text";
}

}  // namespace

const char* OperationName(OperationCF op) {
  return kOperationNames[static_cast<std::size_t>(op)];
}

std::optional<OperationCF> ParseOperation(std::string_view name) {
  for (std::size_t i = 0; i < kOperationNames.size(); ++i) {
    if (name == kOperationNames[i]) return static_cast<OperationCF>(i);
  }
  return std::nullopt;
}

const char* ChartTypeName(ChartType type) {
  return kChartNames[static_cast<std::size_t>(type)];
}

std::optional<ChartType> ParseChartType(std::string_view name) {
  const std::string lower = ToLower(name);
  for (std::size_t i = 0; i < kChartNames.size(); ++i) {
    if (lower == kChartNames[i]) return static_cast<ChartType>(i);
  }
  return std::nullopt;
}

std::size_t MinArity(OperationCF op) {
  switch (op) {
    case OperationCF::kIsDuplicate: return 0;
    case OperationCF::kIsError:
    case OperationCF::kIsBlank:
    case OperationCF::kLessGreaterThan:
    case OperationCF::kTopBottomK:
    case OperationCF::kEqualContains: return 1;
    default: return 2;
  }
}

bool IsMultiBucket(OperationCF op) { return MinArity(op) >= 2; }

std::string ParamValue::ToString() const {
  switch (kind) {
    case ParamKind::kNumber: return CanonicalNumber(number);
    case ParamKind::kText: return text;
    case ParamKind::kBlank: return "<blank>";
    case ParamKind::kError: return "<error>";
    case ParamKind::kDuplicate: return "<duplicate>";
  }
  return text;
}

bool ParamEquals(const ParamValue& a, const ParamValue& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == ParamKind::kNumber) return NearlyEqual(a.number, b.number);
  if (a.kind == ParamKind::kText) return a.text == b.text;
  return true;
}

bool ParamLess(const ParamValue& a, const ParamValue& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.kind == ParamKind::kNumber) {
    return !NearlyEqual(a.number, b.number) && a.number < b.number;
  }
  if (a.kind == ParamKind::kText) return a.text < b.text;
  return false;
}

bool ParamMultisetEquals(std::vector<ParamValue> a, std::vector<ParamValue> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end(), ParamLess);
  std::sort(b.begin(), b.end(), ParamLess);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!ParamEquals(a[i], b[i])) return false;
  }
  return true;
}

nlohmann::json ParamToJson(const ParamValue& p) {
  nlohmann::json j;
  j["kind"] = ParamKindName(p.kind);
  if (p.kind == ParamKind::kNumber) j["value"] = p.number;
  if (p.kind == ParamKind::kText) j["value"] = p.text;
  return j;
}

ParamValue ParamFromJson(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "number") return ParamValue::Number(j.at("value").get<double>());
  if (kind == "text") return ParamValue::Text(j.at("value").get<std::string>());
  if (kind == "blank") return ParamValue::Blank();
  if (kind == "error") return ParamValue::ErrorValue();
  if (kind == "duplicate") return ParamValue::Duplicate();
  throw Error(ErrorCode::kParse, "unknown parameter kind '" + kind + "'");
}

AnalysisRecord AnalysisRecord::CF(std::string table_id, std::size_t field,
                                  OperationCF op,
                                  std::vector<ParamValue> params) {
  AnalysisRecord r;
  r.table_id = std::move(table_id);
  r.kind = RecordKind::kCF;
  r.field_index = field;
  r.operation = op;
  r.parameters = std::move(params);
  return r;
}

AnalysisRecord AnalysisRecord::Chart(std::string table_id, ChartType type,
                                     std::vector<std::size_t> x,
                                     std::vector<std::size_t> y) {
  AnalysisRecord r;
  r.table_id = std::move(table_id);
  r.kind = RecordKind::kChart;
  r.chart_type = type;
  r.x_fields = std::move(x);
  r.y_fields = std::move(y);
  r.coverage = 1.0;
  return r;
}

nlohmann::json RecordToJson(const AnalysisRecord& r) {
  nlohmann::json j;
  j["doc"] = "record";
  j["table_id"] = r.table_id;
  if (r.kind == RecordKind::kCF) {
    j["kind"] = "cf";
    j["field_index"] = r.field_index;
    j["operation"] = OperationName(r.operation);
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : r.parameters) params.push_back(ParamToJson(p));
    j["parameters"] = params;
    if (r.rows) j["rows"] = {r.rows->begin, r.rows->end};
    j["coverage"] = r.coverage;
  } else {
    j["kind"] = "chart";
    j["chart_type"] = ChartTypeName(r.chart_type);
    j["x_fields"] = r.x_fields;
    j["y_fields"] = r.y_fields;
  }
  return j;
}

AnalysisRecord RecordFromJson(const nlohmann::json& j) {
  try {
    AnalysisRecord r;
    r.table_id = j.at("table_id").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cf") {
      r.kind = RecordKind::kCF;
      r.field_index = j.at("field_index").get<std::size_t>();
      const auto op = ParseOperation(j.at("operation").get<std::string>());
      if (!op) throw Error(ErrorCode::kParse, "unknown operation");
      r.operation = *op;
      for (const auto& p : j.at("parameters")) {
        r.parameters.push_back(ParamFromJson(p));
      }
      if (j.contains("rows")) {
        r.rows = RowRange{j["rows"].at(0).get<std::size_t>(),
                          j["rows"].at(1).get<std::size_t>()};
      }
      r.coverage = j.value("coverage", 1.0);
    } else if (kind == "chart") {
      r.kind = RecordKind::kChart;
      const auto type = ParseChartType(j.at("chart_type").get<std::string>());
      if (!type) throw Error(ErrorCode::kParse, "unknown chart type");
      r.chart_type = *type;
      r.x_fields = j.at("x_fields").get<std::vector<std::size_t>>();
      r.y_fields = j.at("y_fields").get<std::vector<std::size_t>>();
    } else {
      throw Error(ErrorCode::kParse, "unknown record kind '" + kind + "'");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("record: ") + e.what());
  }
}

}  // namespace tabsem

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

#ifndef TABSEM_RECORD_HPP_
#define TABSEM_RECORD_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tabsem {

// Conditional formatting condition families. Complementary operations
// (Equal / Not Equal, Top / Bottom, ...) share one entry.
enum class OperationCF : std::uint8_t {
  kIsError,
  kIsBlank,
  kIsDuplicate,
  kLessGreaterThan,
  kTopBottomK,
  kBetween,
  kEqualContains,
  kEqualSet,
  kDataBar,
  kColorScale,
  kIconSet,
  kPartitionSet,
};
inline constexpr std::size_t kNumOperations = 12;

enum class ChartType : std::uint8_t { kBar, kLine, kScatter, kPie };
inline constexpr std::size_t kNumChartTypes = 4;

const char* OperationName(OperationCF op);
std::optional<OperationCF> ParseOperation(std::string_view name);
const char* ChartTypeName(ChartType type);
std::optional<ChartType> ParseChartType(std::string_view name);

// Minimum parameter count of each operation.
std::size_t MinArity(OperationCF op);
// Multi-parameter operations accept up to this many parameters.
inline constexpr std::size_t kMaxBucketParameters = 4;
bool IsMultiBucket(OperationCF op);

enum class ParamKind : std::uint8_t { kNumber, kText, kBlank, kError, kDuplicate };

// One CF parameter. Blank, error and duplicate parameters are sentinels
// without payload.
struct ParamValue {
  ParamKind kind = ParamKind::kNumber;
  double number = 0.0;
  std::string text;

  static ParamValue Number(double v) { return {ParamKind::kNumber, v, {}}; }
  static ParamValue Text(std::string t) {
    return {ParamKind::kText, 0.0, std::move(t)};
  }
  static ParamValue Blank() { return {ParamKind::kBlank, 0.0, {}}; }
  static ParamValue ErrorValue() { return {ParamKind::kError, 0.0, {}}; }
  static ParamValue Duplicate() { return {ParamKind::kDuplicate, 0.0, {}}; }

  bool is_number() const { return kind == ParamKind::kNumber; }
  std::string ToString() const;
};

// Numbers compare with a 1e-9 relative tolerance.
bool ParamEquals(const ParamValue& a, const ParamValue& b);
// Strict weak order: kind, then number or text.
bool ParamLess(const ParamValue& a, const ParamValue& b);
// Order-insensitive multiset equality under ParamEquals.
bool ParamMultisetEquals(std::vector<ParamValue> a, std::vector<ParamValue> b);

nlohmann::json ParamToJson(const ParamValue& p);
ParamValue ParamFromJson(const nlohmann::json& j);

struct RowRange {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  bool operator==(const RowRange&) const = default;
};

enum class RecordKind : std::uint8_t { kCF, kChart };

struct AnalysisRecord {
  std::string table_id;
  RecordKind kind = RecordKind::kCF;
  // CF
  std::size_t field_index = 0;
  OperationCF operation = OperationCF::kEqualContains;
  std::vector<ParamValue> parameters;
  // Rows the record is applied to; absent means the whole field.
  std::optional<RowRange> rows;
  // Share of the field's cells inside the applied rows.
  double coverage = 1.0;
  // Chart
  ChartType chart_type = ChartType::kBar;
  std::vector<std::size_t> x_fields;
  std::vector<std::size_t> y_fields;

  static AnalysisRecord CF(std::string table_id, std::size_t field,
                           OperationCF op, std::vector<ParamValue> params);
  static AnalysisRecord Chart(std::string table_id, ChartType type,
                              std::vector<std::size_t> x,
                              std::vector<std::size_t> y);
};

nlohmann::json RecordToJson(const AnalysisRecord& r);
AnalysisRecord RecordFromJson(const nlohmann::json& j);

}  // namespace tabsem

#endif  // TABSEM_RECORD_HPP_

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

#ifndef TABSEM_SEMANTICS_HPP_
#define TABSEM_SEMANTICS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tabsem/record.hpp"
#include "tabsem/signatures.hpp"
#include "tabsem/table.hpp"

namespace tabsem {

enum class UserIntentCF : std::uint8_t { kDet, kCom };
inline constexpr std::size_t kNumIntentsCF = 2;

enum class DataFocusCF : std::uint8_t {
  kErr, kBla, kMea, kEmp, kRak, kRag, kFre
};
inline constexpr std::size_t kNumFocusesCF = 7;

enum class UserIntentChart : std::uint8_t { kRlt, kCps, kCpr, kTtr };
inline constexpr std::size_t kNumIntentsChart = 4;

enum class DataFocusChart : std::uint8_t { kFmt, kCaf, kHsi, kRag, kFre, kFty };
inline constexpr std::size_t kNumFocusesChart = 6;

const char* IntentName(UserIntentCF u);
const char* FocusName(DataFocusCF d);
const char* IntentName(UserIntentChart u);
const char* FocusName(DataFocusChart d);
std::optional<UserIntentCF> ParseIntentCF(std::string_view s);
std::optional<DataFocusCF> ParseFocusCF(std::string_view s);

// Rak, Rag and Emp only apply to numeric fields.
bool FocusValidFor(DataFocusCF focus, FieldType type);

struct CFSemantics {
  UserIntentCF intent = UserIntentCF::kDet;
  std::vector<DataFocusCF> focuses;  // sorted, unique
  bool operator==(const CFSemantics&) const = default;
};

struct ChartSemantics {
  std::vector<UserIntentChart> intents;  // sorted, unique
  std::vector<DataFocusChart> focuses;   // sorted, unique
  bool operator==(const ChartSemantics&) const = default;
};

// (intent, focus) -> candidate operations, in preference order.
class IntentFocusMap {
 public:
  static IntentFocusMap Default();
  static IntentFocusMap FromJsonText(std::string_view text);
  std::string ToJsonText() const;

  // nullptr when the pair has no entry.
  const std::vector<OperationCF>* Find(UserIntentCF u, DataFocusCF d) const;
  void Set(UserIntentCF u, DataFocusCF d, std::vector<OperationCF> ops);
  const std::map<std::pair<UserIntentCF, DataFocusCF>,
                 std::vector<OperationCF>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::pair<UserIntentCF, DataFocusCF>, std::vector<OperationCF>>
      entries_;
};

UserIntentCF LabelIntentCF(std::span<const AnalysisRecord> records);

std::vector<DataFocusCF> LabelFocusCF(const AnalysisRecord& record,
                                      const Field& field,
                                      std::span<const CellSignature> sigs,
                                      const Vocabulary& vocab);

// Golden label for all records on one field.
CFSemantics LabelSemanticsCF(std::span<const AnalysisRecord> records,
                             const Field& field,
                             std::span<const CellSignature> sigs,
                             const Vocabulary& vocab);

std::vector<OperationCF> CandidateOperations(
    UserIntentCF intent, std::span<const DataFocusCF> focuses,
    const IntentFocusMap& map);

// Disallowed operations drop to -infinity.
std::array<double, kNumOperations> FilterOperationScores(
    const std::array<double, kNumOperations>& scores,
    std::span<const OperationCF> allowed);

// Where a parameter candidate came from; a candidate may carry several.
enum CandidateSource : std::uint16_t {
  kSourceCell = 1 << 0,
  kSourceMean = 1 << 1,
  kSourceMidpoint = 1 << 2,
  kSourceRoundMultiple = 1 << 3,
  kSourceRankK = 1 << 4,
  kSourceEmpirical = 1 << 5,
  kSourceBlank = 1 << 6,
  kSourceError = 1 << 7,
  kSourceDuplicate = 1 << 8,
  kSourceComplement = 1 << 9,
  kSourceCommonRank = 1 << 10,
  kSourceCommonFrequency = 1 << 11,
  kSourceMeaningless = 1 << 12,
};

struct ParamCandidate {
  ParamValue value;
  std::uint16_t sources = 0;
  // Field cells that carry this candidate: cells holding the value, or for
  // rank candidates the cells at that ascending/descending position.
  std::vector<std::size_t> cells;

  bool is_rank_k() const { return (sources & kSourceRankK) != 0; }
};

inline constexpr std::array<std::size_t, 5> kTopKValues = {1, 3, 5, 10, 20};

// Throws FocusTypeMismatch for numeric-only focuses on other field types.
std::vector<ParamCandidate> CandidateParametersForFocus(
    const Field& field, std::span<const CellSignature> sigs,
    DataFocusCF focus, const Vocabulary& vocab);

// Union over focuses (skipping focuses invalid for the field type); equal
// values merge their sources and cells. Rank-k candidates never merge with
// value candidates.
std::vector<ParamCandidate> CandidateParameters(
    const Field& field, std::span<const CellSignature> sigs,
    std::span<const DataFocusCF> focuses, const Vocabulary& vocab);

// Whether `candidate` may fill a parameter slot of `op`.
bool AcceptsCandidate(OperationCF op, const ParamCandidate& candidate);

// Field types allowed on the x axis; empty for charts without an x axis.
std::vector<FieldType> AllowedXTypes(ChartType type);
std::vector<UserIntentChart> ChartIntents(ChartType type, bool x_is_datetime);

ChartSemantics LabelSemanticsChart(const AnalysisRecord& chart,
                                   const Table& table,
                                   std::span<const FieldSignature> sigs);

}  // namespace tabsem

#endif  // TABSEM_SEMANTICS_HPP_

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

#include "tabsem/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "tabsem/executor.hpp"

namespace tabsem {

namespace {

constexpr std::array<const char*, kNumIntentsCF> kIntentCFNames = {"Det",
                                                                   "Com"};
constexpr std::array<const char*, kNumFocusesCF> kFocusCFNames = {
    "Err", "Bla", "Mea", "Emp", "Rak", "Rag", "Fre"};
constexpr std::array<const char*, kNumIntentsChart> kIntentChartNames = {
    "Rlt", "Cps", "Cpr", "Ttr"};
constexpr std::array<const char*, kNumFocusesChart> kFocusChartNames = {
    "Fmt", "Caf", "Hsi", "Rag", "Fre", "Fty"};

template <typename T>
void SortUnique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

const char* IntentName(UserIntentCF u) {
  return kIntentCFNames[static_cast<std::size_t>(u)];
}
const char* FocusName(DataFocusCF d) {
  return kFocusCFNames[static_cast<std::size_t>(d)];
}
const char* IntentName(UserIntentChart u) {
  return kIntentChartNames[static_cast<std::size_t>(u)];
}
const char* FocusName(DataFocusChart d) {
  return kFocusChartNames[static_cast<std::size_t>(d)];
}

std::optional<UserIntentCF> ParseIntentCF(std::string_view s) {
  for (std::size_t i = 0; i < kIntentCFNames.size(); ++i) {
    if (s == kIntentCFNames[i]) return static_cast<UserIntentCF>(i);
  }
  return std::nullopt;
}

std::optional<DataFocusCF> ParseFocusCF(std::string_view s) {
  for (std::size_t i = 0; i < kFocusCFNames.size(); ++i) {
    if (s == kFocusCFNames[i]) return static_cast<DataFocusCF>(i);
  }
  return std::nullopt;
}

bool FocusValidFor(DataFocusCF focus, FieldType type) {
  switch (focus) {
    case DataFocusCF::kRak:
    case DataFocusCF::kRag:
    case DataFocusCF::kEmp:
      return type == FieldType::kNumeric;
    default:
      return true;
  }
}

IntentFocusMap IntentFocusMap::Default() {
  using O = OperationCF;
  using D = DataFocusCF;
  constexpr auto kDet = UserIntentCF::kDet;
  constexpr auto kCom = UserIntentCF::kCom;
  IntentFocusMap m;
  m.Set(kDet, D::kErr, {O::kIsError});
  m.Set(kDet, D::kBla, {O::kIsBlank});
  m.Set(kDet, D::kFre, {O::kIsDuplicate, O::kEqualContains});
  m.Set(kDet, D::kRak, {O::kTopBottomK});
  m.Set(kDet, D::kRag, {O::kEqualContains, O::kBetween, O::kLessGreaterThan});
  m.Set(kDet, D::kMea, {O::kEqualContains});
  m.Set(kDet, D::kEmp, {O::kLessGreaterThan, O::kBetween, O::kEqualContains});
  m.Set(kCom, D::kRag, {O::kColorScale, O::kDataBar, O::kPartitionSet,
                        O::kIconSet, O::kBetween});
  m.Set(kCom, D::kFre, {O::kEqualSet});
  m.Set(kCom, D::kMea, {O::kEqualSet});
  m.Set(kCom, D::kEmp, {O::kPartitionSet, O::kLessGreaterThan});
  m.Set(kCom, D::kRak, {O::kIconSet, O::kPartitionSet});
  m.Set(kCom, D::kErr, {O::kIsError});
  m.Set(kCom, D::kBla, {O::kIsBlank});
  return m;
}

IntentFocusMap IntentFocusMap::FromJsonText(std::string_view text) {
  IntentFocusMap m;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [intent_name, focuses] : j.items()) {
      const auto u = ParseIntentCF(intent_name);
      if (!u) throw Error(ErrorCode::kParse, "unknown intent " + intent_name);
      for (const auto& [focus_name, ops] : focuses.items()) {
        const auto d = ParseFocusCF(focus_name);
        if (!d) throw Error(ErrorCode::kParse, "unknown focus " + focus_name);
        std::vector<OperationCF> list;
        for (const auto& op_name : ops) {
          const auto op = ParseOperation(op_name.get<std::string>());
          if (!op) {
            throw Error(ErrorCode::kParse,
                        "unknown operation " + op_name.get<std::string>());
          }
          list.push_back(*op);
        }
        m.Set(*u, *d, std::move(list));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("intent map: ") + e.what());
  }
  return m;
}

std::string IntentFocusMap::ToJsonText() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [key, ops] : entries_) {
    auto& slot = j[IntentName(key.first)][FocusName(key.second)];
    slot = nlohmann::ordered_json::array();
    for (OperationCF op : ops) slot.push_back(OperationName(op));
  }
  return j.dump(2);
}

const std::vector<OperationCF>* IntentFocusMap::Find(UserIntentCF u,
                                                     DataFocusCF d) const {
  const auto it = entries_.find({u, d});
  return it == entries_.end() ? nullptr : &it->second;
}

void IntentFocusMap::Set(UserIntentCF u, DataFocusCF d,
                         std::vector<OperationCF> ops) {
  entries_[{u, d}] = std::move(ops);
}

UserIntentCF LabelIntentCF(std::span<const AnalysisRecord> records) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyRecordSet, "no records to label");
  }
  if (records.size() >= 2) return UserIntentCF::kCom;
  for (const auto& r : records) {
    switch (r.operation) {
      case OperationCF::kDataBar:
      case OperationCF::kColorScale:
      case OperationCF::kIconSet:
      case OperationCF::kPartitionSet:
      case OperationCF::kEqualSet:
        return UserIntentCF::kCom;
      default:
        break;
    }
  }
  return UserIntentCF::kDet;
}

namespace {

bool CellMatches(const Cell& c, const ParamValue& p) {
  if (p.kind == ParamKind::kNumber) {
    return c.is_number() && NearlyEqual(c.number, p.number);
  }
  if (p.kind == ParamKind::kText) {
    return !c.is_blank() && Trim(c.raw) == Trim(p.text);
  }
  return false;
}

}  // namespace

std::vector<DataFocusCF> LabelFocusCF(const AnalysisRecord& record,
                                      const Field& field,
                                      std::span<const CellSignature> sigs,
                                      const Vocabulary& vocab) {
  std::vector<DataFocusCF> out;
  const bool numeric = field.ftype == FieldType::kNumeric;
  switch (record.operation) {
    case OperationCF::kIsError: out.push_back(DataFocusCF::kErr); break;
    case OperationCF::kIsBlank: out.push_back(DataFocusCF::kBla); break;
    case OperationCF::kIsDuplicate: out.push_back(DataFocusCF::kFre); break;
    case OperationCF::kTopBottomK: out.push_back(DataFocusCF::kRak); break;
    default: break;
  }
  const bool value_params = record.operation != OperationCF::kTopBottomK &&
                            record.operation != OperationCF::kIsError &&
                            record.operation != OperationCF::kIsBlank;
  std::vector<double> range_values;
  if (numeric && value_params &&
      std::any_of(field.cells.begin(), field.cells.end(),
                  [](const Cell& c) { return c.is_number(); })) {
    range_values = CommonRangeValues(field);
  }
  if (value_params) {
    for (const ParamValue& p : record.parameters) {
      for (std::size_t i = 0; i < field.cells.size(); ++i) {
        if (!CellMatches(field.cells[i], p)) continue;
        if (sigs[i].flags.is_common_frequency) {
          out.push_back(DataFocusCF::kFre);
        }
        if (sigs[i].flags.is_common_rank) out.push_back(DataFocusCF::kRak);
      }
      if (p.kind == ParamKind::kNumber && numeric) {
        if (std::any_of(range_values.begin(), range_values.end(),
                        [&](double v) { return NearlyEqual(v, p.number); })) {
          out.push_back(DataFocusCF::kRag);
        }
        if (vocab.IsEmpirical(p.number)) out.push_back(DataFocusCF::kEmp);
      }
      if (p.kind == ParamKind::kText && vocab.IsMeaningless(p.text)) {
        out.push_back(DataFocusCF::kMea);
      }
    }
    // Selecting exactly the complement of the meaningless cells.
    bool has_meaningless = false;
    for (const auto& s : sigs) has_meaningless |= s.flags.is_meaningless;
    const bool equality = record.operation == OperationCF::kEqualContains ||
                          record.operation == OperationCF::kEqualSet;
    if (has_meaningless && equality && !record.parameters.empty()) {
      const auto picked =
          SelectCells(record.operation, record.parameters, field);
      bool complement = true;
      for (std::size_t i = 0; i < field.cells.size(); ++i) {
        if (field.cells[i].is_blank()) continue;
        const bool want = !sigs[i].flags.is_meaningless;
        complement &= picked[i] == want;
      }
      if (complement) out.push_back(DataFocusCF::kMea);
    }
  }
  std::erase_if(out, [&](DataFocusCF d) { return !FocusValidFor(d, field.ftype); });
  SortUnique(out);
  return out;
}

CFSemantics LabelSemanticsCF(std::span<const AnalysisRecord> records,
                             const Field& field,
                             std::span<const CellSignature> sigs,
                             const Vocabulary& vocab) {
  CFSemantics label;
  label.intent = LabelIntentCF(records);
  for (const auto& r : records) {
    const auto f = LabelFocusCF(r, field, sigs, vocab);
    label.focuses.insert(label.focuses.end(), f.begin(), f.end());
  }
  SortUnique(label.focuses);
  return label;
}

std::vector<OperationCF> CandidateOperations(
    UserIntentCF intent, std::span<const DataFocusCF> focuses,
    const IntentFocusMap& map) {
  std::vector<OperationCF> out;
  for (DataFocusCF d : focuses) {
    const auto* ops = map.Find(intent, d);
    if (ops == nullptr) {
      throw Error(ErrorCode::kUnknownPair,
                  std::string(IntentName(intent)) + "/" + FocusName(d));
    }
    for (OperationCF op : *ops) {
      if (std::find(out.begin(), out.end(), op) == out.end()) {
        out.push_back(op);
      }
    }
  }
  return out;
}

std::array<double, kNumOperations> FilterOperationScores(
    const std::array<double, kNumOperations>& scores,
    std::span<const OperationCF> allowed) {
  std::array<double, kNumOperations> out;
  out.fill(-std::numeric_limits<double>::infinity());
  for (OperationCF op : allowed) {
    const auto i = static_cast<std::size_t>(op);
    out[i] = scores[i];
  }
  return out;
}

namespace {

// Collects candidates keyed by (value, rank-k-ness).
class CandidateSet {
 public:
  void Add(ParamValue value, std::uint16_t sources,
           std::vector<std::size_t> cells) {
    const bool rank_k = (sources & kSourceRankK) != 0;
    for (auto& c : items_) {
      if (c.is_rank_k() == rank_k && ParamEquals(c.value, value)) {
        c.sources |= sources;
        c.cells.insert(c.cells.end(), cells.begin(), cells.end());
        SortUnique(c.cells);
        return;
      }
    }
    SortUnique(cells);
    items_.push_back({std::move(value), sources, std::move(cells)});
  }

  std::vector<ParamCandidate> Take() {
    std::stable_sort(items_.begin(), items_.end(),
                     [](const ParamCandidate& a, const ParamCandidate& b) {
                       if (a.is_rank_k() != b.is_rank_k()) {
                         return b.is_rank_k();
                       }
                       return ParamLess(a.value, b.value);
                     });
    return std::move(items_);
  }

 private:
  std::vector<ParamCandidate> items_;
};

ParamValue CellParam(const Cell& c) {
  if (c.is_number()) return ParamValue::Number(c.number);
  return ParamValue::Text(Trim(c.raw));
}

std::vector<std::size_t> CellsWithValue(const Field& field,
                                        const ParamValue& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < field.cells.size(); ++i) {
    if (CellMatches(field.cells[i], v)) out.push_back(i);
  }
  return out;
}

void AddFocusCandidates(CandidateSet& set, const Field& field,
                        std::span<const CellSignature> sigs,
                        DataFocusCF focus, const Vocabulary& vocab) {
  const auto& cells = field.cells;
  switch (focus) {
    case DataFocusCF::kErr: {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].is_error()) idx.push_back(i);
      }
      if (!idx.empty()) set.Add(ParamValue::ErrorValue(), kSourceError, idx);
      break;
    }
    case DataFocusCF::kBla: {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].is_blank()) idx.push_back(i);
      }
      set.Add(ParamValue::Blank(), kSourceBlank, idx);
      break;
    }
    case DataFocusCF::kMea: {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (sigs[i].flags.is_meaningless) {
          set.Add(CellParam(cells[i]), kSourceCell | kSourceMeaningless, {i});
        } else if (!cells[i].is_blank()) {
          rest.push_back(i);
        }
      }
      if (rest.size() < cells.size() && !rest.empty()) {
        const std::string key = CellValueKey(cells[rest.front()]);
        const bool single = std::all_of(rest.begin(), rest.end(),
                                        [&](std::size_t i) {
                                          return CellValueKey(cells[i]) == key;
                                        });
        bool any_meaningless = false;
        for (const auto& s : sigs) any_meaningless |= s.flags.is_meaningless;
        if (single && any_meaningless) {
          set.Add(CellParam(cells[rest.front()]),
                  kSourceCell | kSourceComplement, rest);
        }
      }
      break;
    }
    case DataFocusCF::kEmp: {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const Cell& c : cells) {
        if (!c.is_number()) continue;
        lo = std::min(lo, c.number);
        hi = std::max(hi, c.number);
      }
      for (double e : vocab.empirical) {
        if (e < lo || e > hi) continue;
        const ParamValue v = ParamValue::Number(e);
        auto idx = CellsWithValue(field, v);
        const std::uint16_t src =
            kSourceEmpirical | (idx.empty() ? 0 : kSourceCell);
        set.Add(v, src, std::move(idx));
      }
      break;
    }
    case DataFocusCF::kRak: {
      std::size_t ranked = 0;
      for (const auto& s : sigs) ranked += s.asc_rank > 0;
      for (std::size_t k : kTopKValues) {
        if (k > ranked) continue;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < sigs.size(); ++i) {
          if (sigs[i].asc_rank == k || sigs[i].desc_rank == k) idx.push_back(i);
        }
        set.Add(ParamValue::Number(static_cast<double>(k)), kSourceRankK, idx);
      }
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].is_number() && sigs[i].flags.is_common_rank) {
          set.Add(CellParam(cells[i]), kSourceCell | kSourceCommonRank, {i});
        }
      }
      break;
    }
    case DataFocusCF::kRag: {
      if (std::none_of(cells.begin(), cells.end(),
                       [](const Cell& c) { return c.is_number(); })) {
        break;
      }
      double sum = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      std::size_t n = 0;
      for (const Cell& c : cells) {
        if (!c.is_number()) continue;
        sum += c.number;
        lo = std::min(lo, c.number);
        hi = std::max(hi, c.number);
        ++n;
      }
      const double mean = sum / static_cast<double>(n);
      const double mid = (hi + lo) / 2.0;
      for (double v : CommonRangeValues(field)) {
        const ParamValue pv = ParamValue::Number(v);
        auto idx = CellsWithValue(field, pv);
        std::uint16_t src = 0;
        if (NearlyEqual(v, mean)) src |= kSourceMean;
        if (NearlyEqual(v, mid)) src |= kSourceMidpoint;
        if (!idx.empty()) src |= kSourceCell;
        if (!(src & (kSourceMean | kSourceMidpoint))) {
          src |= kSourceRoundMultiple;
        }
        set.Add(pv, src, std::move(idx));
      }
      break;
    }
    case DataFocusCF::kFre: {
      std::vector<std::size_t> dup;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (sigs[i].freq_count > 1) dup.push_back(i);
        if (sigs[i].flags.is_common_frequency) {
          set.Add(CellParam(cells[i]), kSourceCell | kSourceCommonFrequency,
                  {i});
        }
      }
      if (!dup.empty()) set.Add(ParamValue::Duplicate(), kSourceDuplicate, dup);
      break;
    }
  }
}

}  // namespace

std::vector<ParamCandidate> CandidateParametersForFocus(
    const Field& field, std::span<const CellSignature> sigs,
    DataFocusCF focus, const Vocabulary& vocab) {
  if (!FocusValidFor(focus, field.ftype)) {
    throw Error(ErrorCode::kFocusTypeMismatch,
                std::string(FocusName(focus)) + " on non-numeric field '" +
                    field.header + "'");
  }
  CandidateSet set;
  AddFocusCandidates(set, field, sigs, focus, vocab);
  return set.Take();
}

std::vector<ParamCandidate> CandidateParameters(
    const Field& field, std::span<const CellSignature> sigs,
    std::span<const DataFocusCF> focuses, const Vocabulary& vocab) {
  CandidateSet set;
  for (DataFocusCF d : focuses) {
    if (FocusValidFor(d, field.ftype)) {
      AddFocusCandidates(set, field, sigs, d, vocab);
    }
  }
  return set.Take();
}

bool AcceptsCandidate(OperationCF op, const ParamCandidate& c) {
  const bool number_value = c.value.is_number() && !c.is_rank_k();
  switch (op) {
    case OperationCF::kIsError: return c.value.kind == ParamKind::kError;
    case OperationCF::kIsBlank: return c.value.kind == ParamKind::kBlank;
    case OperationCF::kIsDuplicate: return false;
    case OperationCF::kTopBottomK: return c.is_rank_k();
    case OperationCF::kEqualContains:
    case OperationCF::kEqualSet:
      return !c.is_rank_k() && (c.sources & kSourceCell) != 0 &&
             (c.value.kind == ParamKind::kNumber ||
              c.value.kind == ParamKind::kText);
    case OperationCF::kLessGreaterThan:
    case OperationCF::kBetween:
    case OperationCF::kDataBar:
    case OperationCF::kColorScale:
    case OperationCF::kIconSet:
    case OperationCF::kPartitionSet:
      return number_value;
  }
  return false;
}

std::vector<FieldType> AllowedXTypes(ChartType type) {
  switch (type) {
    case ChartType::kBar: return {FieldType::kString};
    case ChartType::kLine: return {FieldType::kDateTime, FieldType::kString};
    case ChartType::kScatter: return {FieldType::kNumeric};
    case ChartType::kPie: return {};
  }
  return {};
}

std::vector<UserIntentChart> ChartIntents(ChartType type, bool x_is_datetime) {
  switch (type) {
    case ChartType::kPie: return {UserIntentChart::kCps};
    case ChartType::kScatter: return {UserIntentChart::kRlt};
    case ChartType::kBar: return {UserIntentChart::kCpr};
    case ChartType::kLine:
      return {x_is_datetime ? UserIntentChart::kTtr : UserIntentChart::kCpr};
  }
  return {};
}

ChartSemantics LabelSemanticsChart(const AnalysisRecord& chart,
                                   const Table& table,
                                   std::span<const FieldSignature> sigs) {
  auto check = [&](std::size_t i) {
    if (i >= table.n_fields() || i >= sigs.size()) {
      throw Error(ErrorCode::kInvalidAxis,
                  "axis field " + std::to_string(i) + " of table '" +
                      table.id + "'");
    }
  };
  for (std::size_t i : chart.x_fields) check(i);
  for (std::size_t i : chart.y_fields) check(i);

  const bool x_datetime =
      !chart.x_fields.empty() &&
      table.fields[chart.x_fields.front()].ftype == FieldType::kDateTime;
  ChartSemantics label;
  label.intents = ChartIntents(chart.chart_type, x_datetime);

  auto x_type_ok = [&](FieldType t) {
    for (UserIntentChart u : label.intents) {
      if (u == UserIntentChart::kTtr && t == FieldType::kDateTime) return true;
      if (u == UserIntentChart::kCpr && t == FieldType::kString) return true;
      if (u == UserIntentChart::kRlt && t == FieldType::kNumeric) return true;
    }
    return false;
  };
  for (std::size_t i : chart.x_fields) {
    const FieldSignature& s = sigs[i];
    if (s.is_date_format) label.focuses.push_back(DataFocusChart::kFmt);
    if (s.is_common_affix) label.focuses.push_back(DataFocusChart::kCaf);
    if (s.is_common_header) label.focuses.push_back(DataFocusChart::kHsi);
    if (!s.is_common_cardinality) label.focuses.push_back(DataFocusChart::kFre);
    if (x_type_ok(table.fields[i].ftype)) {
      label.focuses.push_back(DataFocusChart::kFty);
    }
  }
  for (std::size_t i : chart.y_fields) {
    const FieldSignature& s = sigs[i];
    if (s.is_common_header) label.focuses.push_back(DataFocusChart::kHsi);
    if (s.is_common_range) label.focuses.push_back(DataFocusChart::kRag);
    if (!s.is_common_cardinality) label.focuses.push_back(DataFocusChart::kFre);
    if (table.fields[i].ftype == FieldType::kNumeric) {
      label.focuses.push_back(DataFocusChart::kFty);
    }
  }
  SortUnique(label.intents);
  SortUnique(label.focuses);
  return label;
}

}  // namespace tabsem

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

#include "tabsem/executor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "tabsem/signatures.hpp"

namespace tabsem {

namespace {

std::string ParamKey(const ParamValue& p) {
  if (p.kind == ParamKind::kNumber) return "n:" + CanonicalNumber(p.number);
  return "t:" + Trim(p.text);
}

bool MatchesValue(const Cell& c, const ParamValue& p) {
  if (c.is_blank()) return false;
  if (p.kind == ParamKind::kNumber) {
    return c.is_number() && NearlyEqual(c.number, p.number);
  }
  if (p.kind == ParamKind::kText) return Trim(c.raw) == Trim(p.text);
  return false;
}

// Non-empty and non-universal over the cells where `domain` holds.
bool IsProperSubset(const Field& field,
                    const std::function<bool(const Cell&)>& domain,
                    const std::function<bool(const Cell&)>& pick) {
  std::size_t in_domain = 0;
  std::size_t picked = 0;
  for (const Cell& c : field.cells) {
    if (!domain(c)) continue;
    ++in_domain;
    picked += pick(c);
  }
  return picked > 0 && picked < in_domain;
}

bool AllNumbers(std::span<const ParamValue> params) {
  return std::all_of(params.begin(), params.end(),
                     [](const ParamValue& p) { return p.is_number(); });
}

bool StrictlyAscending(std::span<const ParamValue> params) {
  for (std::size_t i = 1; i < params.size(); ++i) {
    if (!(params[i - 1].number < params[i].number) ||
        NearlyEqual(params[i - 1].number, params[i].number)) {
      return false;
    }
  }
  return true;
}

std::size_t NumberCount(const Field& field) {
  return static_cast<std::size_t>(
      std::count_if(field.cells.begin(), field.cells.end(),
                    [](const Cell& c) { return c.is_number(); }));
}

bool InBuckets(double v, std::span<const ParamValue> params) {
  return v >= params.front().number && v < params.back().number;
}

const auto kIsNumber = [](const Cell& c) { return c.is_number(); };
const auto kNonBlank = [](const Cell& c) { return !c.is_blank(); };

}  // namespace

bool IsExecutable(OperationCF op, std::span<const ParamValue> params,
                  const Field& field) {
  const bool numeric_field = field.ftype == FieldType::kNumeric;
  switch (op) {
    case OperationCF::kIsError:
      return params.size() == 1 && params[0].kind == ParamKind::kError;
    case OperationCF::kIsBlank:
      return params.size() == 1 && params[0].kind == ParamKind::kBlank;
    case OperationCF::kIsDuplicate: {
      if (!params.empty()) return false;
      std::unordered_map<std::string, std::size_t> counts;
      for (const Cell& c : field.cells) {
        if (!c.is_blank()) ++counts[CellValueKey(c)];
      }
      return IsProperSubset(field, kNonBlank, [&](const Cell& c) {
        return counts[CellValueKey(c)] > 1;
      });
    }
    case OperationCF::kLessGreaterThan: {
      if (!numeric_field || params.size() != 1 || !params[0].is_number()) {
        return false;
      }
      const double p = params[0].number;
      return IsProperSubset(field, kIsNumber,
                            [&](const Cell& c) { return c.number < p; }) ||
             IsProperSubset(field, kIsNumber,
                            [&](const Cell& c) { return c.number <= p; });
    }
    case OperationCF::kTopBottomK: {
      if (!numeric_field || params.size() != 1 || !params[0].is_number()) {
        return false;
      }
      const double k = params[0].number;
      return k >= 1 && std::floor(k) == k &&
             k < static_cast<double>(NumberCount(field));
    }
    case OperationCF::kBetween: {
      if (!numeric_field || params.size() != 2 || !AllNumbers(params) ||
          !StrictlyAscending(params)) {
        return false;
      }
      const double a = params[0].number;
      const double b = params[1].number;
      for (int form = 0; form < 4; ++form) {
        const bool lo_open = form & 1;
        const bool hi_open = form & 2;
        const bool ok = IsProperSubset(field, kIsNumber, [&](const Cell& c) {
          const double v = c.number;
          return (lo_open ? v > a : v >= a) && (hi_open ? v < b : v <= b);
        });
        if (ok) return true;
      }
      return false;
    }
    case OperationCF::kEqualContains: {
      if (params.size() != 1 || (params[0].kind != ParamKind::kNumber &&
                                 params[0].kind != ParamKind::kText)) {
        return false;
      }
      return IsProperSubset(field, kNonBlank, [&](const Cell& c) {
        return MatchesValue(c, params[0]);
      });
    }
    case OperationCF::kEqualSet: {
      if (params.size() < 2 || params.size() > kMaxBucketParameters) {
        return false;
      }
      std::vector<std::string> keys;
      for (const auto& p : params) {
        if (p.kind != ParamKind::kNumber && p.kind != ParamKind::kText) {
          return false;
        }
        keys.push_back(ParamKey(p));
        const bool present =
            std::any_of(field.cells.begin(), field.cells.end(),
                        [&](const Cell& c) { return MatchesValue(c, p); });
        if (!present) return false;
      }
      std::sort(keys.begin(), keys.end());
      return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
    }
    case OperationCF::kDataBar:
    case OperationCF::kColorScale:
    case OperationCF::kIconSet:
    case OperationCF::kPartitionSet: {
      if (!numeric_field || params.size() < 2 ||
          params.size() > kMaxBucketParameters || !AllNumbers(params) ||
          !StrictlyAscending(params)) {
        return false;
      }
      return IsProperSubset(field, kIsNumber, [&](const Cell& c) {
        return InBuckets(c.number, params);
      });
    }
  }
  return false;
}

std::vector<bool> SelectCells(OperationCF op,
                              std::span<const ParamValue> params,
                              const Field& field) {
  std::vector<bool> out(field.cells.size(), false);
  auto each = [&](const std::function<bool(const Cell&)>& pick) {
    for (std::size_t i = 0; i < field.cells.size(); ++i) {
      out[i] = pick(field.cells[i]);
    }
  };
  switch (op) {
    case OperationCF::kIsError:
      each([](const Cell& c) { return c.is_error(); });
      break;
    case OperationCF::kIsBlank:
      each([](const Cell& c) { return c.is_blank(); });
      break;
    case OperationCF::kIsDuplicate: {
      std::unordered_map<std::string, std::size_t> counts;
      for (const Cell& c : field.cells) {
        if (!c.is_blank()) ++counts[CellValueKey(c)];
      }
      each([&](const Cell& c) {
        return !c.is_blank() && counts[CellValueKey(c)] > 1;
      });
      break;
    }
    case OperationCF::kLessGreaterThan:
      if (params.size() == 1 && params[0].is_number()) {
        each([&](const Cell& c) {
          return c.is_number() && c.number >= params[0].number;
        });
      }
      break;
    case OperationCF::kTopBottomK: {
      if (params.size() != 1 || !params[0].is_number()) break;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < field.cells.size(); ++i) {
        if (field.cells[i].is_number()) idx.push_back(i);
      }
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) {
                         return field.cells[a].number > field.cells[b].number;
                       });
      const auto k = static_cast<std::size_t>(
          std::max(0.0, std::floor(params[0].number)));
      for (std::size_t i = 0; i < idx.size() && i < k; ++i) out[idx[i]] = true;
      break;
    }
    case OperationCF::kBetween:
      if (params.size() == 2 && AllNumbers(params)) {
        each([&](const Cell& c) {
          return c.is_number() && c.number >= params[0].number &&
                 c.number <= params[1].number;
        });
      }
      break;
    case OperationCF::kEqualContains:
    case OperationCF::kEqualSet:
      each([&](const Cell& c) {
        return std::any_of(params.begin(), params.end(),
                           [&](const ParamValue& p) {
                             return MatchesValue(c, p);
                           });
      });
      break;
    case OperationCF::kDataBar:
    case OperationCF::kColorScale:
    case OperationCF::kIconSet:
    case OperationCF::kPartitionSet:
      if (params.size() >= 2 && AllNumbers(params)) {
        each([&](const Cell& c) {
          return c.is_number() && InBuckets(c.number, params);
        });
      }
      break;
  }
  return out;
}

double RecordCoverage(const AnalysisRecord& record, std::size_t n_rows) {
  if (!record.rows || n_rows == 0) return 1.0;
  const std::size_t end = std::min(record.rows->end, n_rows);
  const std::size_t begin = std::min(record.rows->begin, end);
  return static_cast<double>(end - begin) / static_cast<double>(n_rows);
}

}  // namespace tabsem

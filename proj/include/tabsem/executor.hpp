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

#ifndef TABSEM_EXECUTOR_HPP_
#define TABSEM_EXECUTOR_HPP_

#include <span>
#include <vector>

#include "tabsem/record.hpp"
#include "tabsem/table.hpp"

namespace tabsem {

// Applies the condition forms of each operation to a field.
//
// A record is executable when its parameters have the kinds and count the
// operation needs and at least one of its condition forms selects a
// non-empty, non-universal subset of the cells it ranges over (numbers for
// the numeric comparisons, non-blank cells otherwise). Is Error / Is Blank
// are executable even when they select nothing.
bool IsExecutable(OperationCF op, std::span<const ParamValue> params,
                  const Field& field);

// Cells selected by the operation's primary condition form: equality for
// Equal/Equal Set, `v >= p` for Less/Greater Than, the max-k values for
// Top K, the closed interval for Between, the half-open buckets
// [p_i, p_{i+1}) for the multi-bucket operations.
std::vector<bool> SelectCells(OperationCF op,
                              std::span<const ParamValue> params,
                              const Field& field);

double RecordCoverage(const AnalysisRecord& record, std::size_t n_rows);

}  // namespace tabsem

#endif  // TABSEM_EXECUTOR_HPP_

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

#ifndef TABSEM_SYNTH_HPP_
#define TABSEM_SYNTH_HPP_

#include <cstdint>
#include <map>

#include "tabsem/corpus.hpp"

namespace tabsem {

// Relative frequencies of the planted CF patterns, keyed by operation.
// Supported: IsError, IsBlank, IsDuplicate, LessGreaterThan, TopBottomK,
// EqualContains, ColorScale.
using PatternMix = std::map<OperationCF, double>;

// Shaped after the operation counts of a large crawled spreadsheet corpus.
PatternMix DefaultPatternMix();

struct SynthSpec {
  std::size_t n_tables = 1000;
  std::size_t min_rows = 8;
  std::size_t max_rows = 40;
  std::uint64_t seed = 7;
  PatternMix pattern_mix = DefaultPatternMix();
  // Share of tables that carry a chart record instead of CF records.
  double chart_fraction = 0.3;
  // Labeled fields per CF table are drawn from [1, max_cf_fields].
  std::size_t max_cf_fields = 3;

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults. Throws InvalidSpec.
  static SynthSpec FromJson(const nlohmann::json& j);
  void Validate() const;
};

// Seeded generator of labeled tables whose gold records are deterministic
// functions of the planted values:
//   error cells            -> IsError
//   blank cells            -> IsBlank
//   repeated names         -> IsDuplicate
//   distinct scores        -> TopBottomK [3]
//   symmetric decimals     -> LessGreaterThan [mean]
//   statuses + placeholder -> EqualContains [placeholder]
//   integers spanning 0..100 -> ColorScale [0, 100]
// Chart tables: (date, numeric) -> Line, (many categories, numeric) -> Bar,
// (few categories, numeric) -> Pie, (numeric, numeric) -> Scatter.
Corpus GenerateSynthetic(const SynthSpec& spec);

}  // namespace tabsem

#endif  // TABSEM_SYNTH_HPP_

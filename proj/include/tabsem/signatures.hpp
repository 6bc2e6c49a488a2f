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

#ifndef TABSEM_SIGNATURES_HPP_
#define TABSEM_SIGNATURES_HPP_

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabsem/table.hpp"

namespace tabsem {

// Meaningless strings and empirical numbers that users commonly reference.
struct Vocabulary {
  std::set<std::string> meaningless;  // lowercased, trimmed
  std::vector<double> empirical;      // sorted, unique

  static Vocabulary Default();

  bool IsMeaningless(std::string_view raw) const;
  bool IsEmpirical(double value) const;
  void Normalize();
};

struct Keywords {
  std::vector<std::string> x;
  std::vector<std::string> y;

  static Keywords Default();
};

// Everything the statistical module can be configured with. Loaded from a
// single JSON object {"meaningless", "empirical", "keywords_x",
// "keywords_y"}; missing keys keep their defaults.
struct SignatureConfig {
  Vocabulary vocab = Vocabulary::Default();
  Keywords keywords = Keywords::Default();

  static SignatureConfig FromJsonText(std::string_view text);
  static SignatureConfig FromFile(const std::string& path);
  std::string ToJsonText() const;
};

struct CellFlags {
  bool is_common_frequency = false;
  bool is_common_rank = false;
  bool is_common_range = false;
  bool is_meaningless = false;
  bool is_empirical = false;
  bool is_blank = false;
  bool is_error = false;

  bool any() const {
    return is_common_frequency || is_common_rank || is_common_range ||
           is_meaningless || is_empirical || is_blank || is_error;
  }
  bool operator==(const CellFlags&) const = default;
};

struct CellSignature {
  std::size_t freq_count = 0;
  double freq_ratio = 0.0;
  std::size_t freq_rank = 0;  // dense, 1 = most frequent; 0 when blank
  std::size_t asc_rank = 0;   // 0 for cells outside the ranked set
  std::size_t desc_rank = 0;
  double range_minmax = 0.0;
  double range_log = 0.0;
  double percentile_minmax = 0.0;
  CellFlags flags;

  bool operator==(const CellSignature&) const = default;
};

inline constexpr std::size_t kCellSignatureWidth = 15;

// Model-facing encoding: counts and ranks pass through log1p, ratios and
// flags are used as is.
std::array<double, kCellSignatureWidth> CellSignatureVector(
    const CellSignature& sig);

inline constexpr std::size_t kMetadataWidth = 13;

// Order: cardinality ratio, key entropy, char entropy, mean, variance, min,
// max, range, benford deviation (always 0), change rate, proportion
// negative, proportion blank, header word count.
using FieldMetadata = std::array<double, kMetadataWidth>;

struct FieldSignature {
  std::array<bool, 3> ftype_onehot{};  // numeric, string, datetime
  double header_similarity = 0.0;
  bool has_keyword_x = false;
  bool has_keyword_y = false;
  bool is_common_cardinality = false;
  bool is_common_range = false;
  bool is_common_affix = false;
  bool is_common_header = false;
  bool is_common_type = false;
  bool is_date_format = false;
  FieldMetadata metadata{};
};

inline constexpr std::size_t kFieldSignatureWidth = 3 + 1 + 2 + 6 +
                                                    kMetadataWidth;

std::array<double, kFieldSignatureWidth> FieldSignatureVector(
    const FieldSignature& sig);

inline constexpr double kCommonCardinalityThreshold = 0.99;
inline constexpr double kCommonHeaderThreshold = 0.61;
inline constexpr double kCommonFieldRangeThreshold = 0.97;
inline constexpr double kCommonAffixShare = 0.8;
inline constexpr double kCommonFrequencyShare = 0.3;
inline constexpr double kRoundMultipleTolerance = 0.005;
inline constexpr std::size_t kDefaultSampleCap = 64;

// Equality key for frequency counting: numbers compare by value, everything
// else by trimmed raw text. Empty for blank cells.
std::string CellValueKey(const Cell& cell);

std::vector<CellSignature> ComputeCellSignatures(const Field& field,
                                                 const Vocabulary& vocab);

// Sorted 1-based positions that count as common ranks among n values.
std::vector<std::size_t> CommonRankPositions(std::size_t n);

// Sorted distinct values: mean, midpoint and the cell values near integer
// multiples of the field's power-of-ten step. Throws NotNumeric.
std::vector<double> CommonRangeValues(const Field& field);

bool NearlyEqual(double a, double b);

FieldSignature ComputeFieldSignature(const Table& table,
                                     std::size_t field_index,
                                     const Vocabulary& vocab,
                                     const Keywords& keywords);

// Jaccard similarity over lowercased character trigrams.
double TrigramJaccard(std::string_view a, std::string_view b);
double HeaderSimilarity(std::string_view target,
                        std::span<const std::string> others);

std::vector<std::size_t> SampleCells(const Field& field,
                                     std::span<const CellSignature> sigs,
                                     std::size_t cap = kDefaultSampleCap);

}  // namespace tabsem

#endif  // TABSEM_SIGNATURES_HPP_

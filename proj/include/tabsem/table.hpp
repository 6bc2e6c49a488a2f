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

#ifndef TABSEM_TABLE_HPP_
#define TABSEM_TABLE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabsem/error.hpp"

namespace tabsem {

enum class CellKind : std::uint8_t { kNumber, kText, kBlank, kError, kDate };

struct Cell {
  std::string raw;
  CellKind kind = CellKind::kBlank;
  // Valid only for kNumber.
  double number = 0.0;
  // Days since 1970-01-01; valid only for kDate.
  std::int64_t epoch_days = 0;

  bool is_number() const { return kind == CellKind::kNumber; }
  bool is_blank() const { return kind == CellKind::kBlank; }
  bool is_error() const { return kind == CellKind::kError; }
  bool is_text() const { return kind == CellKind::kText; }
  bool is_date() const { return kind == CellKind::kDate; }

  bool operator==(const Cell&) const = default;
};

enum class FieldType : std::uint8_t { kNumeric, kString, kDateTime };

const char* FieldTypeName(FieldType type);
std::optional<FieldType> ParseFieldType(std::string_view name);

struct Field {
  std::size_t index = 0;
  std::string header;
  std::vector<Cell> cells;
  FieldType ftype = FieldType::kString;

  std::size_t size() const { return cells.size(); }
};

struct Table {
  std::string id;
  std::vector<Field> fields;
  std::size_t n_rows = 0;

  std::size_t n_fields() const { return fields.size(); }
  const Field& field(std::size_t i) const;
};

// The fixed spreadsheet error lexicon.
std::span<const std::string_view> ErrorLexicon();

// Classification precedence is Blank > Error > Date > Number > Text.
Cell ClassifyCell(std::string_view raw);

std::optional<double> ParseNumber(std::string_view raw);
// Accepts YYYY-MM-DD (optionally followed by a time part), MM/DD/YYYY and
// "Mon YYYY".
std::optional<std::int64_t> ParseDate(std::string_view raw);

// Shortest decimal rendering that round-trips.
std::string CanonicalNumber(double value);

// Numeric (or DateTime) when at least this share of the non-blank,
// non-error cells are numbers (or dates).
inline constexpr double kTypeMajority = 0.95;

FieldType InferFieldType(std::span<const Cell> cells);

Table ParseTable(const std::vector<std::vector<std::string>>& rows,
                 bool header_in_first_row, std::string id);

// Builds a table from headers and string rows (rows may be ragged).
Table MakeTable(std::string id, std::vector<std::string> headers,
                const std::vector<std::vector<std::string>>& rows);

// Header row followed by the raw cell text; inverse of ParseTable with
// header_in_first_row = true.
std::vector<std::vector<std::string>> SerializeTable(const Table& table);

std::string Trim(std::string_view s);
std::string ToLower(std::string_view s);

}  // namespace tabsem

#endif  // TABSEM_TABLE_HPP_

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

#include "tabsem/table.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace tabsem {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNotNumeric: return "NotNumeric";
    case ErrorCode::kEmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::kUnknownPair: return "UnknownPair";
    case ErrorCode::kFocusTypeMismatch: return "FocusTypeMismatch";
    case ErrorCode::kInvalidAxis: return "InvalidAxis";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kCorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::kUntrainedModel: return "UntrainedModel";
    case ErrorCode::kNoNumericField: return "NoNumericField";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

const char* FieldTypeName(FieldType type) {
  switch (type) {
    case FieldType::kNumeric: return "numeric";
    case FieldType::kString: return "string";
    case FieldType::kDateTime: return "datetime";
  }
  return "string";
}

std::optional<FieldType> ParseFieldType(std::string_view name) {
  if (name == "numeric") return FieldType::kNumeric;
  if (name == "string") return FieldType::kString;
  if (name == "datetime") return FieldType::kDateTime;
  return std::nullopt;
}

const Field& Table::field(std::size_t i) const {
  if (i >= fields.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "field " + std::to_string(i) + " of table '" + id + "'");
  }
  return fields[i];
}

std::span<const std::string_view> ErrorLexicon() {
  static constexpr std::array<std::string_view, 8> kLexicon = {
      "#REF!", "#DIV/0!", "#N/A", "#VALUE!", "#NAME?", "#NUM!", "#NULL!",
      "#####"};
  return kLexicon;
}

std::string Trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

bool ConsumePrefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) == prefix) {
    s.remove_prefix(prefix.size());
    return true;
  }
  return false;
}

bool ConsumeCurrency(std::string_view& s) {
  return ConsumePrefix(s, "$") || ConsumePrefix(s, "\xE2\x82\xAC") ||
         ConsumePrefix(s, "\xC2\xA3");
}

// Validates digit grouping in the integer part and returns the digits with
// separators removed.
std::optional<std::string> StripThousands(std::string_view s) {
  const std::size_t dot = s.find_first_of(".eE");
  std::string_view int_part = s.substr(0, dot);
  std::string_view rest = dot == std::string_view::npos ? "" : s.substr(dot);
  if (rest.find(',') != std::string_view::npos) return std::nullopt;
  std::string out;
  if (int_part.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    bool first = true;
    while (start <= int_part.size()) {
      const std::size_t comma = int_part.find(',', start);
      const std::string_view group = int_part.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      if (first ? (group.empty() || group.size() > 3) : group.size() != 3) {
        return std::nullopt;
      }
      out.append(group);
      first = false;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    out.append(int_part);
  }
  out.append(rest);
  return out;
}

// Strict decimal: digits, optional fraction, optional exponent.
bool IsDecimalLiteral(std::string_view s) {
  std::size_t i = 0;
  std::size_t digits = 0;
  while (i < s.size() && IsDigit(s[i])) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && IsDigit(s[i])) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && IsDigit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

// Howard Hinnant's days_from_civil.
std::int64_t DaysFromCivil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool ValidDate(int y, int m, int d) {
  if (y < 1 || y > 9999 || m < 1 || m > 12 || d < 1) return false;
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int limit = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
  return d <= limit;
}

std::optional<int> ParseFixedInt(std::string_view s, std::size_t min_len,
                                 std::size_t max_len) {
  if (s.size() < min_len || s.size() > max_len) return std::nullopt;
  if (!std::all_of(s.begin(), s.end(), IsDigit)) return std::nullopt;
  int value = 0;
  std::from_chars(s.data(), s.data() + s.size(), value);
  return value;
}

}  // namespace

std::optional<double> ParseNumber(std::string_view raw) {
  std::string trimmed = Trim(raw);
  std::string_view s = trimmed;
  if (s.empty()) return std::nullopt;
  bool negative = false;
  bool have_currency = ConsumeCurrency(s);
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!have_currency) ConsumeCurrency(s);
  bool percent = false;
  if (!s.empty() && s.back() == '%') {
    percent = true;
    s.remove_suffix(1);
  }
  const auto stripped = StripThousands(s);
  if (!stripped || !IsDecimalLiteral(*stripped)) return std::nullopt;
  double value = 0.0;
  const char* begin = stripped->data();
  const char* end = begin + stripped->size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  if (percent) value /= 100.0;
  if (negative) value = -value;
  return value;
}

std::optional<std::int64_t> ParseDate(std::string_view raw) {
  const std::string trimmed = Trim(raw);
  std::string_view s = trimmed;
  // ISO-8601 date, optionally with a time part.
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
    const auto y = ParseFixedInt(s.substr(0, 4), 4, 4);
    const auto m = ParseFixedInt(s.substr(5, 2), 2, 2);
    const auto d = ParseFixedInt(s.substr(8, 2), 2, 2);
    const bool tail_ok = s.size() == 10 || s[10] == 'T' || s[10] == ' ';
    if (y && m && d && tail_ok && ValidDate(*y, *m, *d)) {
      return DaysFromCivil(*y, static_cast<unsigned>(*m),
                           static_cast<unsigned>(*d));
    }
    return std::nullopt;
  }
  // MM/DD/YYYY
  const std::size_t s1 = s.find('/');
  if (s1 != std::string_view::npos) {
    const std::size_t s2 = s.find('/', s1 + 1);
    if (s2 == std::string_view::npos) return std::nullopt;
    const auto m = ParseFixedInt(s.substr(0, s1), 1, 2);
    const auto d = ParseFixedInt(s.substr(s1 + 1, s2 - s1 - 1), 1, 2);
    const auto y = ParseFixedInt(s.substr(s2 + 1), 4, 4);
    if (m && d && y && ValidDate(*y, *m, *d)) {
      return DaysFromCivil(*y, static_cast<unsigned>(*m),
                           static_cast<unsigned>(*d));
    }
    return std::nullopt;
  }
  // Mon YYYY
  if (s.size() == 8 && s[3] == ' ') {
    static constexpr std::array<std::string_view, 12> kMonths = {
        "jan", "feb", "mar", "apr", "may", "jun",
        "jul", "aug", "sep", "oct", "nov", "dec"};
    const std::string mon = ToLower(s.substr(0, 3));
    const auto y = ParseFixedInt(s.substr(4), 4, 4);
    for (std::size_t i = 0; i < kMonths.size(); ++i) {
      if (mon == kMonths[i] && y && *y >= 1) {
        return DaysFromCivil(*y, static_cast<unsigned>(i + 1), 1);
      }
    }
  }
  return std::nullopt;
}

std::string CanonicalNumber(double value) {
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(),
                                       value);
  if (ec != std::errc()) return "0";
  return std::string(buf.data(), ptr);
}

Cell ClassifyCell(std::string_view raw) {
  Cell cell;
  cell.raw = std::string(raw);
  const std::string trimmed = Trim(raw);
  if (trimmed.empty()) {
    cell.kind = CellKind::kBlank;
    return cell;
  }
  for (std::string_view err : ErrorLexicon()) {
    if (trimmed == err) {
      cell.kind = CellKind::kError;
      return cell;
    }
  }
  if (const auto days = ParseDate(trimmed)) {
    cell.kind = CellKind::kDate;
    cell.epoch_days = *days;
    return cell;
  }
  if (const auto number = ParseNumber(trimmed)) {
    cell.kind = CellKind::kNumber;
    cell.number = *number;
    return cell;
  }
  cell.kind = CellKind::kText;
  return cell;
}

FieldType InferFieldType(std::span<const Cell> cells) {
  std::size_t counted = 0;
  std::size_t numbers = 0;
  std::size_t dates = 0;
  for (const Cell& c : cells) {
    if (c.is_blank() || c.is_error()) continue;
    ++counted;
    numbers += c.is_number();
    dates += c.is_date();
  }
  if (counted == 0) return FieldType::kString;
  const double n = static_cast<double>(counted);
  if (static_cast<double>(numbers) >= kTypeMajority * n) {
    return FieldType::kNumeric;
  }
  if (static_cast<double>(dates) >= kTypeMajority * n) {
    return FieldType::kDateTime;
  }
  return FieldType::kString;
}

Table MakeTable(std::string id, std::vector<std::string> headers,
                const std::vector<std::vector<std::string>>& rows) {
  std::size_t width = headers.size();
  for (const auto& row : rows) width = std::max(width, row.size());
  if (width == 0) {
    throw Error(ErrorCode::kEmptyInput, "table '" + id + "' has no columns");
  }
  headers.resize(width);
  Table table;
  table.id = std::move(id);
  table.n_rows = rows.size();
  table.fields.resize(width);
  for (std::size_t j = 0; j < width; ++j) {
    Field& f = table.fields[j];
    f.index = j;
    f.header = std::move(headers[j]);
    f.cells.reserve(rows.size());
    for (const auto& row : rows) {
      f.cells.push_back(ClassifyCell(j < row.size() ? row[j] : ""));
    }
    f.ftype = InferFieldType(f.cells);
  }
  return table;
}

Table ParseTable(const std::vector<std::vector<std::string>>& rows,
                 bool header_in_first_row, std::string id) {
  std::size_t width = 0;
  for (const auto& row : rows) width = std::max(width, row.size());
  if (rows.empty() || width == 0) {
    throw Error(ErrorCode::kEmptyInput, "no rows or no columns");
  }
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> body;
  if (header_in_first_row) {
    headers = rows.front();
    body.assign(rows.begin() + 1, rows.end());
  } else {
    for (std::size_t j = 0; j < width; ++j) {
      headers.push_back("col_" + std::to_string(j));
    }
    body = rows;
  }
  return MakeTable(std::move(id), std::move(headers), body);
}

std::vector<std::vector<std::string>> SerializeTable(const Table& table) {
  std::vector<std::vector<std::string>> rows(table.n_rows + 1);
  for (const Field& f : table.fields) {
    rows[0].push_back(f.header);
    for (std::size_t r = 0; r < table.n_rows; ++r) {
      rows[r + 1].push_back(f.cells[r].raw);
    }
  }
  return rows;
}

}  // namespace tabsem

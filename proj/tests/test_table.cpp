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

#include <gtest/gtest.h>

#include "tabsem/csv.hpp"
#include "tabsem/error.hpp"
#include "tabsem/table.hpp"
#include "test_util.hpp"

namespace tabsem {
namespace {

TEST(ClassifyCell, Kinds) {
  EXPECT_EQ(ClassifyCell("").kind, CellKind::kBlank);
  EXPECT_EQ(ClassifyCell("   ").kind, CellKind::kBlank);
  EXPECT_EQ(ClassifyCell("#REF!").kind, CellKind::kError);
  const Cell n = ClassifyCell("76");
  ASSERT_EQ(n.kind, CellKind::kNumber);
  EXPECT_DOUBLE_EQ(n.number, 76.0);
  EXPECT_EQ(ClassifyCell("ACCEPTED").kind, CellKind::kText);
  EXPECT_EQ(ClassifyCell("2021-01-03").kind, CellKind::kDate);
}

TEST(ClassifyCell, NumberForms) {
  EXPECT_DOUBLE_EQ(ClassifyCell("1,234.5").number, 1234.5);
  EXPECT_DOUBLE_EQ(ClassifyCell("-3").number, -3.0);
  EXPECT_DOUBLE_EQ(ClassifyCell("45%").number, 0.45);
  EXPECT_EQ(ClassifyCell("1e400").kind, CellKind::kText);
  EXPECT_EQ(ClassifyCell("12abc").kind, CellKind::kText);
}

TEST(ClassifyCell, ErrorLexiconIsExact) {
  for (std::string_view e : ErrorLexicon()) {
    EXPECT_EQ(ClassifyCell(e).kind, CellKind::kError) << e;
  }
  EXPECT_EQ(ClassifyCell("#REF").kind, CellKind::kText);
}

TEST(InferFieldType, Examples) {
  auto cells = [](std::vector<std::string> raw) {
    std::vector<Cell> out;
    for (const auto& r : raw) out.push_back(ClassifyCell(r));
    return out;
  };
  EXPECT_EQ(InferFieldType(cells({"85", "76", "92"})), FieldType::kNumeric);
  EXPECT_EQ(InferFieldType(cells({"ACCEPTED", "Unknown", "ACCEPTED"})),
            FieldType::kString);
  EXPECT_EQ(InferFieldType(cells({"2021-01-03", "2021-02-07", ""})),
            FieldType::kDateTime);
  EXPECT_EQ(InferFieldType(cells({"", ""})), FieldType::kString);
  EXPECT_EQ(InferFieldType(cells({"1", "#N/A", "3"})), FieldType::kNumeric);
}

TEST(ParseTable, HeaderRow) {
  const Table t = ParseTable({{"Round 1"}, {"9.5"}, {"9.8"}, {"9.1"}}, true, "r");
  ASSERT_EQ(t.n_fields(), 1u);
  EXPECT_EQ(t.n_rows, 3u);
  EXPECT_EQ(t.fields[0].header, "Round 1");
  EXPECT_EQ(t.fields[0].ftype, FieldType::kNumeric);
}

TEST(ParseTable, HeaderOnly) {
  const Table t = ParseTable({{"a", "b"}}, true, "h");
  EXPECT_EQ(t.n_fields(), 2u);
  EXPECT_EQ(t.n_rows, 0u);
}

TEST(ParseTable, SyntheticHeaders) {
  const Table t = ParseTable({{"x", "1"}, {"y", "2"}}, false, "s");
  ASSERT_EQ(t.n_fields(), 2u);
  EXPECT_EQ(t.fields[0].header, "col_0");
  EXPECT_EQ(t.fields[1].header, "col_1");
  EXPECT_EQ(t.n_rows, 2u);
}

TEST(ParseTable, RaggedRowsPadWithBlanks) {
  const Table t = ParseTable({{"a", "b"}, {"1"}, {"2", "3"}}, true, "g");
  for (const Field& f : t.fields) EXPECT_EQ(f.size(), t.n_rows);
  EXPECT_TRUE(t.fields[1].cells[0].is_blank());
}

TEST(ParseTable, EmptyInputThrows) {
  try {
    ParseTable({}, true, "e");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(ParseTable, SerializeRoundTrip) {
  const Table t = ParseTable({{"a", "b"}, {"1", "x"}, {"", "#N/A"}}, true, "rt");
  const Table u = ParseTable(SerializeTable(t), true, "rt");
  ASSERT_EQ(u.n_fields(), t.n_fields());
  for (std::size_t j = 0; j < t.n_fields(); ++j) {
    EXPECT_EQ(u.fields[j].cells, t.fields[j].cells);
  }
}

TEST(Csv, QuotesAndLineBreaks) {
  const CsvRows rows = ParseCsv("a,\"b,c\"\r\n\"x\"\"y\",\"l1\nl2\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "b,c");
  EXPECT_EQ(rows[1][0], "x\"y");
  EXPECT_EQ(rows[1][1], "l1\nl2");
  EXPECT_EQ(ParseCsv(WriteCsv(rows)), rows);
}

TEST(Csv, BomIsSkipped) {
  const CsvRows rows = ParseCsv("\xEF\xBB\xBFh\n1\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "h");
}

}  // namespace
}  // namespace tabsem

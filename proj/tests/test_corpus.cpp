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

#include <algorithm>
#include <random>

#include "corpus_fixtures.hpp"
#include "tabsem/corpus.hpp"
#include "tabsem/error.hpp"
#include "tabsem/executor.hpp"
#include "test_util.hpp"

namespace tabsem {
namespace {

using O = OperationCF;

AnalysisRecord Ranged(std::size_t b, std::size_t e, double coverage) {
  AnalysisRecord r = AnalysisRecord::CF("t", 0, O::kLessGreaterThan, {ParamValue::Number(5)});
  r.rows = RowRange{b, e};
  r.coverage = coverage;
  return r;
}

TEST(MergeRecords, Examples) {
  const AnalysisRecord a = AnalysisRecord::CF("t", 0, O::kEqualContains, {ParamValue::Text("x")});
  EXPECT_EQ(MergeRecords({a, a}).size(), 1u);
  EXPECT_TRUE(MergeRecords({}).empty());
  const AnalysisRecord b = AnalysisRecord::CF("t", 0, O::kEqualContains, {ParamValue::Text("y")});
  EXPECT_EQ(MergeRecords({a, b}).size(), 2u);
}

TEST(MergeRecords, ContiguousRangesCollapse) {
  const auto out = MergeRecords({Ranged(4, 8, 0.2), Ranged(0, 4, 0.2)});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].rows, (RowRange{0, 8}));
  EXPECT_NEAR(out[0].coverage, 0.4, 1e-12);
  EXPECT_EQ(MergeRecords({Ranged(0, 4, 0.2), Ranged(6, 8, 0.1)}).size(), 2u);
  AnalysisRecord whole = Ranged(0, 1, 0.05);
  whole.rows.reset();
  const auto w = MergeRecords({Ranged(0, 4, 0.2), whole});
  ASSERT_EQ(w.size(), 1u);
  EXPECT_FALSE(w[0].rows.has_value());
  EXPECT_EQ(w[0].coverage, 1.0);
}

TEST(MergeRecords, IdempotentAndRowPreserving) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 300; ++i) {
    const auto records = testing::RandomRecordSet(rng);
    const auto once = MergeRecords(records);
    EXPECT_EQ(testing::Dump(MergeRecords(once)), testing::Dump(once));
    EXPECT_EQ(testing::CoveredRows(once), testing::CoveredRows(records));
    std::vector<AnalysisRecord> shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(testing::Dump(MergeRecords(shuffled)), testing::Dump(once));
  }
}

TEST(FilterByCoverage, Examples) {
  EXPECT_EQ(FilterByCoverage({Ranged(0, 9, 0.9)}, 0.5).size(), 1u);
  EXPECT_TRUE(FilterByCoverage({Ranged(0, 3, 0.3)}, 0.5).empty());
  EXPECT_EQ(FilterByCoverage({Ranged(0, 3, 0.0)}, 0.0).size(), 1u);
  const AnalysisRecord chart = AnalysisRecord::Chart("t", ChartType::kPie, {}, {1});
  EXPECT_EQ(FilterByCoverage({chart}, 1.0).size(), 1u);
  EXPECT_THROW(FilterByCoverage({}, 1.5), Error);
}

TEST(DedupAndSample, SevenDistinctKeepFive) {
  const std::vector<Table> tables = testing::SchemaGroupFixture();
  const auto out = DedupAndSample(tables, 5, 7);
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(std::count_if(out.begin(), out.end(),
                          [](const Table& t) { return t.id != "other"; }),
            5);
  EXPECT_TRUE(std::none_of(out.begin(), out.end(),
                           [](const Table& t) { return t.id == "g0-copy"; }));
  const auto again = DedupAndSample(tables, 5, 7);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].id, again[i].id);
}

TEST(DedupAndSample, SmallGroupsAndCopies) {
  const std::vector<Table> all = testing::SchemaGroupFixture();
  const std::vector<Table> three(all.begin(), all.begin() + 3);
  EXPECT_EQ(DedupAndSample(three, 5, 1).size(), 3u);
  const Table t = MakeTable("a", {"x"}, {{"1"}});
  Table u = t;
  u.id = "b";
  EXPECT_EQ(DedupAndSample({t, u}, 5, 1).size(), 1u);
  EXPECT_THROW(DedupAndSample({t}, 0, 1), Error);
}

TEST(DedupAndSample, SizeBound) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Table> tables;
    const std::size_t n = rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      tables.push_back(MakeTable("t" + std::to_string(i), {rng() % 3 ? "a" : "b"},
                                 {{std::to_string(rng() % 8)}}));
    }
    std::set<std::string> unique, groups;
    for (const Table& t : tables) {
      unique.insert(SchemaKey(t) + "|" + t.fields[0].cells[0].raw);
      groups.insert(SchemaKey(t));
    }
    const std::size_t cap = 1 + rng() % 4;
    EXPECT_LE(DedupAndSample(tables, cap, trial).size(),
              std::min(unique.size(), groups.size() * cap));
  }
}

TEST(SchemaKey, CaseInsensitiveHeadersAndTypes) {
  const Table a = MakeTable("a", {"Name", "Score"}, {{"x", "1"}});
  const Table b = MakeTable("b", {"name ", "SCORE"}, {{"y", "2"}});
  const Table c = MakeTable("c", {"Name", "Score"}, {{"x", "y"}});
  EXPECT_EQ(SchemaKey(a), SchemaKey(b));
  EXPECT_NE(SchemaKey(a), SchemaKey(c));
}

TEST(RecordIsValid, ArityAndReferences) {
  const Table t = MakeTable("t", {"a", "b"}, {{"1", "2"}});
  EXPECT_TRUE(RecordIsValid(AnalysisRecord::CF("t", 1, O::kIsDuplicate, {}), t));
  EXPECT_FALSE(RecordIsValid(AnalysisRecord::CF("t", 2, O::kIsDuplicate, {}), t));
  EXPECT_FALSE(RecordIsValid(AnalysisRecord::CF("t", 0, O::kColorScale, {ParamValue::Number(1)}), t));
  EXPECT_FALSE(RecordIsValid(AnalysisRecord::CF("u", 0, O::kIsDuplicate, {}), t));
  EXPECT_FALSE(RecordIsValid(AnalysisRecord::Chart("t", ChartType::kBar, {0}, {}), t));
  EXPECT_TRUE(RecordIsValid(AnalysisRecord::Chart("t", ChartType::kBar, {0}, {1}), t));
}

TEST(CorpusIo, RoundTripPlainAndGzip) {
  Corpus c;
  c.header = {{"note", "x"}};
  c.tables = testing::SchemaGroupFixture();
  c.records = {AnalysisRecord::CF("g1", 1, O::kLessGreaterThan, {ParamValue::Number(10.5)}),
               AnalysisRecord::Chart("g2", ChartType::kBar, {0}, {1})};
  c.records[0].rows = RowRange{0, 1};
  c.records[0].coverage = 0.5;
  const std::string text = SerializeCorpus(c);
  const Corpus back = ParseCorpus(text);
  EXPECT_EQ(SerializeCorpus(back), text);
  EXPECT_EQ(back.tables.size(), c.tables.size());
  EXPECT_EQ(back.tables[1].fields[1].ftype, FieldType::kNumeric);
  EXPECT_EQ(back.records[0].rows, c.records[0].rows);
  const std::string dir = testing::TempDir("corpus_io");
  for (const std::string name : {"/c.jsonl", "/c.jsonl.gz"}) {
    WriteCorpus(dir + name, c);
    EXPECT_EQ(SerializeCorpus(ReadCorpus(dir + name)), text);
  }
  EXPECT_NE(ReadFileMaybeGzip(dir + "/c.jsonl.gz").find(kCorpusFormat), std::string::npos);
}

TEST(CorpusIo, Errors) {
  try {
    ParseCorpus("{not json\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
  try {
    ReadCorpus("/nonexistent/dir/file.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(PrepareCorpus, Pipeline) {
  Corpus raw;
  raw.tables = testing::SchemaGroupFixture();
  AnalysisRecord low = AnalysisRecord::CF("g1", 1, O::kLessGreaterThan, {ParamValue::Number(5)});
  low.rows = RowRange{0, 1};
  AnalysisRecord dup = AnalysisRecord::CF("other", 0, O::kEqualContains, {ParamValue::Text("oslo")});
  AnalysisRecord bad = AnalysisRecord::CF("other", 9, O::kIsDuplicate, {});
  raw.records = {low, dup, dup, bad};
  PrepOptions opts;
  PrepStats stats;
  const Corpus out = PrepareCorpus(raw, opts, &stats);
  EXPECT_EQ(stats.invalid_records, 1u);
  EXPECT_EQ(stats.merged_records, 1u);
  EXPECT_EQ(stats.low_coverage_records, 0u);
  EXPECT_EQ(stats.dropped_tables, 3u);
  EXPECT_EQ(out.tables.size(), 6u);
  opts.coverage_threshold = 0.9;
  const Corpus strict = PrepareCorpus(raw, opts, &stats);
  EXPECT_EQ(stats.low_coverage_records, 1u);
  for (const AnalysisRecord& r : strict.records) EXPECT_NE(r.table_id, "g1");
}

}  // namespace
}  // namespace tabsem

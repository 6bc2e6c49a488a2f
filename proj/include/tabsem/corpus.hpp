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

#ifndef TABSEM_CORPUS_HPP_
#define TABSEM_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tabsem/record.hpp"
#include "tabsem/table.hpp"

namespace tabsem {

// Format tag written in the header document of every corpus file.
inline constexpr std::string_view kCorpusFormat = "tabsem-corpus/1";

// Tables plus analysis records. A corpus file is JSONL: one header document,
// then table documents and record documents in any order.
struct Corpus {
  nlohmann::json header = nlohmann::json::object();
  std::vector<Table> tables;
  std::vector<AnalysisRecord> records;

  // nullptr when absent.
  const Table* FindTable(std::string_view id) const;
  // Records grouped by table id.
  std::map<std::string, std::vector<const AnalysisRecord*>> RecordsByTable()
      const;
};

nlohmann::json TableToJson(const Table& table);
Table TableFromJson(const nlohmann::json& j);

std::string SerializeCorpus(const Corpus& corpus);
Corpus ParseCorpus(std::string_view text);

// Reads plain or gzip-compressed files.
std::string ReadFileMaybeGzip(const std::string& path);
Corpus ReadCorpus(const std::string& path);
// Writes gzip when the path ends in ".gz".
void WriteTextFile(const std::string& path, std::string_view text);
void WriteCorpus(const std::string& path, const Corpus& corpus);

// References resolve within the table and CF arity holds.
bool RecordIsValid(const AnalysisRecord& record, const Table& table);

// Collapses records with identical (table, field, operation, parameters)
// and unions their contiguous or overlapping row ranges; a record without a
// row range covers the whole field. Chart records collapse on identical
// (table, type, x, y). Output is sorted canonically, so the function is
// idempotent.
std::vector<AnalysisRecord> MergeRecords(std::vector<AnalysisRecord> records);

// Drops CF records whose coverage is below `threshold`; chart records pass.
inline constexpr double kDefaultCoverageThreshold = 0.5;
std::vector<AnalysisRecord> FilterByCoverage(
    std::vector<AnalysisRecord> records,
    double threshold = kDefaultCoverageThreshold);

// Lowercased headers and field types, in order.
std::string SchemaKey(const Table& table);

// Removes exact duplicates (same headers and cell text), then keeps a
// seeded uniform sample of at most `max_per_schema` tables per schema.
// Output preserves input order.
inline constexpr std::size_t kDefaultMaxPerSchema = 5;
std::vector<Table> DedupAndSample(const std::vector<Table>& tables,
                                  std::size_t max_per_schema,
                                  std::uint64_t seed);

// Extension point for splitting records that span several detected tables.
// The interchange format carries one table per document, so this returns
// its input.
std::vector<AnalysisRecord> SplitMultiTableRecords(
    std::vector<AnalysisRecord> records);

struct PrepOptions {
  double coverage_threshold = kDefaultCoverageThreshold;
  std::size_t max_per_schema = kDefaultMaxPerSchema;
  std::uint64_t seed = 7;
};

struct PrepStats {
  std::size_t invalid_records = 0;
  std::size_t merged_records = 0;
  std::size_t low_coverage_records = 0;
  std::size_t dropped_tables = 0;
};

// Merge, split, coverage filter, then schema dedup and sampling. Record
// coverage is recomputed from each record's row range.
Corpus PrepareCorpus(const Corpus& raw, const PrepOptions& options,
                     PrepStats* stats = nullptr);

}  // namespace tabsem

#endif  // TABSEM_CORPUS_HPP_

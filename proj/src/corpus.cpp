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

#include "tabsem/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "rng.hpp"
#include "tabsem/error.hpp"
#include "tabsem/executor.hpp"

namespace tabsem {

namespace {

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

// Merge key of a record, excluding its row range.
std::string RecordKey(const AnalysisRecord& r) {
  nlohmann::json j = RecordToJson(r);
  j.erase("rows");
  j.erase("coverage");
  return j.dump();
}

std::string ContentKey(const Table& t) {
  nlohmann::json j = TableToJson(t);
  j.erase("id");
  return j.dump();
}

}  // namespace

const Table* Corpus::FindTable(std::string_view id) const {
  for (const Table& t : tables) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

std::map<std::string, std::vector<const AnalysisRecord*>>
Corpus::RecordsByTable() const {
  std::map<std::string, std::vector<const AnalysisRecord*>> out;
  for (const AnalysisRecord& r : records) out[r.table_id].push_back(&r);
  return out;
}

nlohmann::json TableToJson(const Table& table) {
  nlohmann::json j;
  j["doc"] = "table";
  j["id"] = table.id;
  nlohmann::json headers = nlohmann::json::array();
  nlohmann::json types = nlohmann::json::array();
  for (const Field& f : table.fields) {
    headers.push_back(f.header);
    types.push_back(FieldTypeName(f.ftype));
  }
  j["headers"] = std::move(headers);
  j["types"] = std::move(types);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < table.n_rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (const Field& f : table.fields) row.push_back(f.cells[r].raw);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

Table TableFromJson(const nlohmann::json& j) {
  try {
    std::vector<std::string> headers =
        j.at("headers").get<std::vector<std::string>>();
    std::vector<std::vector<std::string>> rows;
    for (const nlohmann::json& row : j.at("rows")) {
      std::vector<std::string> cells;
      for (const nlohmann::json& c : row) {
        if (c.is_string()) {
          cells.push_back(c.get<std::string>());
        } else if (c.is_null()) {
          cells.emplace_back();
        } else {
          cells.push_back(c.dump());
        }
      }
      rows.push_back(std::move(cells));
    }
    Table t = MakeTable(j.at("id").get<std::string>(), std::move(headers),
                        rows);
    if (j.contains("types")) {
      const auto types = j.at("types").get<std::vector<std::string>>();
      for (std::size_t i = 0; i < types.size() && i < t.fields.size(); ++i) {
        const auto ft = ParseFieldType(types[i]);
        if (!ft) throw Error(ErrorCode::kParse, "unknown type: " + types[i]);
        t.fields[i].ftype = *ft;
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad table doc: ") + e.what());
  }
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  nlohmann::json header = corpus.header;
  header["doc"] = "header";
  header["format"] = kCorpusFormat;
  header["n_tables"] = corpus.tables.size();
  header["n_records"] = corpus.records.size();
  out += header.dump();
  out += '\n';
  for (const Table& t : corpus.tables) {
    out += TableToJson(t).dump();
    out += '\n';
  }
  for (const AnalysisRecord& r : corpus.records) {
    out += RecordToJson(r).dump();
    out += '\n';
  }
  return out;
}

Corpus ParseCorpus(std::string_view text) {
  Corpus corpus;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": " + e.what());
    }
    const std::string doc = j.value("doc", "");
    if (doc == "header") {
      if (j.value("format", "") != kCorpusFormat) {
        throw Error(ErrorCode::kParse,
                    "unsupported corpus format: " + j.value("format", ""));
      }
      j.erase("n_tables");
      j.erase("n_records");
      corpus.header = std::move(j);
    } else if (doc == "table") {
      corpus.tables.push_back(TableFromJson(j));
    } else if (doc == "record") {
      corpus.records.push_back(RecordFromJson(j));
    } else {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": unknown doc type '" + doc + "'");
    }
  }
  return corpus;
}

std::string ReadFileMaybeGzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string out;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) {
    out.append(buf, static_cast<std::size_t>(n));
  }
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw Error(ErrorCode::kIo, "read error in " + path);
  return out;
}

Corpus ReadCorpus(const std::string& path) {
  return ParseCorpus(ReadFileMaybeGzip(path));
}

void WriteTextFile(const std::string& path, std::string_view text) {
  if (EndsWith(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (f == nullptr) throw Error(ErrorCode::kIo, "cannot write " + path);
    const int n = text.empty()
                      ? 0
                      : gzwrite(f, text.data(),
                                static_cast<unsigned>(text.size()));
    gzclose(f);
    if (n != static_cast<int>(text.size())) {
      throw Error(ErrorCode::kIo, "write error in " + path);
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write error in " + path);
}

void WriteCorpus(const std::string& path, const Corpus& corpus) {
  WriteTextFile(path, SerializeCorpus(corpus));
}

bool RecordIsValid(const AnalysisRecord& r, const Table& table) {
  if (r.table_id != table.id) return false;
  if (r.kind == RecordKind::kCF) {
    if (r.field_index >= table.n_fields()) return false;
    const std::size_t n = r.parameters.size();
    if (n < MinArity(r.operation)) return false;
    if (!IsMultiBucket(r.operation) && n > std::max<std::size_t>(
                                               MinArity(r.operation), 1)) {
      return false;
    }
    if (IsMultiBucket(r.operation) && n > kMaxBucketParameters) return false;
    if (r.rows && r.rows->begin >= r.rows->end) return false;
    return true;
  }
  if (r.y_fields.empty()) return false;
  for (std::size_t i : r.x_fields) {
    if (i >= table.n_fields()) return false;
  }
  for (std::size_t i : r.y_fields) {
    if (i >= table.n_fields()) return false;
  }
  return true;
}

std::vector<AnalysisRecord> MergeRecords(std::vector<AnalysisRecord> records) {
  std::map<std::string, std::vector<AnalysisRecord>> groups;
  for (AnalysisRecord& r : records) {
    groups[RecordKey(r)].push_back(std::move(r));
  }
  std::vector<AnalysisRecord> out;
  for (auto& [key, group] : groups) {
    const bool whole = std::any_of(group.begin(), group.end(),
                                   [](const auto& r) { return !r.rows; });
    if (whole || group.front().kind == RecordKind::kChart) {
      AnalysisRecord r = std::move(group.front());
      if (whole) {
        r.rows.reset();
        r.coverage = 1.0;
      }
      out.push_back(std::move(r));
      continue;
    }
    std::sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
      return std::tie(a.rows->begin, a.rows->end) <
             std::tie(b.rows->begin, b.rows->end);
    });
    // Coverage per row, taken from the first record with a non-empty range.
    double per_row = 0.0;
    for (const AnalysisRecord& r : group) {
      const std::size_t len = r.rows->end - r.rows->begin;
      if (len > 0) {
        per_row = r.coverage / static_cast<double>(len);
        break;
      }
    }
    std::vector<AnalysisRecord> merged;
    for (AnalysisRecord& r : group) {
      if (!merged.empty() && r.rows->begin <= merged.back().rows->end) {
        AnalysisRecord& m = merged.back();
        m.rows->end = std::max(m.rows->end, r.rows->end);
        m.coverage =
            std::min(1.0, per_row * static_cast<double>(m.rows->end -
                                                        m.rows->begin));
      } else {
        merged.push_back(std::move(r));
      }
    }
    for (AnalysisRecord& r : merged) out.push_back(std::move(r));
  }
  return out;
}

std::vector<AnalysisRecord> FilterByCoverage(
    std::vector<AnalysisRecord> records, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw Error(ErrorCode::kInvalidSpec, "coverage threshold outside [0,1]");
  }
  std::erase_if(records, [&](const AnalysisRecord& r) {
    return r.kind == RecordKind::kCF && r.coverage < threshold;
  });
  return records;
}

std::string SchemaKey(const Table& table) {
  std::string key;
  for (const Field& f : table.fields) {
    key += ToLower(Trim(f.header));
    key += '\x1f';
    key += FieldTypeName(f.ftype);
    key += '\x1e';
  }
  return key;
}

std::vector<Table> DedupAndSample(const std::vector<Table>& tables,
                                  std::size_t max_per_schema,
                                  std::uint64_t seed) {
  if (max_per_schema == 0) {
    throw Error(ErrorCode::kInvalidSpec, "max_per_schema must be >= 1");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (!seen.insert(ContentKey(tables[i])).second) continue;
    groups[SchemaKey(tables[i])].push_back(i);
  }
  internal::Rng rng(seed);
  std::vector<std::size_t> keep;
  for (auto& [key, idx] : groups) {
    if (idx.size() > max_per_schema) {
      rng.Shuffle(&idx);
      idx.resize(max_per_schema);
    }
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  std::vector<Table> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(tables[i]);
  return out;
}

std::vector<AnalysisRecord> SplitMultiTableRecords(
    std::vector<AnalysisRecord> records) {
  return records;
}

Corpus PrepareCorpus(const Corpus& raw, const PrepOptions& options,
                     PrepStats* stats) {
  PrepStats local;
  PrepStats& st = stats != nullptr ? *stats : local;
  st = {};
  std::map<std::string, const Table*> by_id;
  for (const Table& t : raw.tables) by_id.emplace(t.id, &t);

  std::vector<AnalysisRecord> records;
  for (const AnalysisRecord& r : raw.records) {
    auto it = by_id.find(r.table_id);
    if (it == by_id.end() || !RecordIsValid(r, *it->second)) {
      ++st.invalid_records;
      continue;
    }
    AnalysisRecord copy = r;
    if (copy.kind == RecordKind::kCF) {
      copy.coverage = RecordCoverage(copy, it->second->n_rows);
    }
    records.push_back(std::move(copy));
  }
  const std::size_t before_merge = records.size();
  records = MergeRecords(std::move(records));
  st.merged_records = before_merge - records.size();
  records = SplitMultiTableRecords(std::move(records));
  const std::size_t before_filter = records.size();
  records = FilterByCoverage(std::move(records), options.coverage_threshold);
  st.low_coverage_records = before_filter - records.size();

  Corpus out;
  out.header = raw.header;
  out.tables = DedupAndSample(raw.tables, options.max_per_schema,
                              options.seed);
  st.dropped_tables = raw.tables.size() - out.tables.size();
  std::unordered_set<std::string> kept;
  for (const Table& t : out.tables) kept.insert(t.id);
  for (AnalysisRecord& r : records) {
    if (kept.count(r.table_id) != 0) out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace tabsem

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

#include "tabsem/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

#include "rng.hpp"
#include "tabsem/error.hpp"

namespace tabsem {

namespace {

using internal::Rng;

struct Column {
  std::string header;
  std::vector<std::string> cells;
  // CF gold for this column, if labeled.
  std::optional<OperationCF> op;
  std::vector<ParamValue> params;
};

const std::vector<std::string> kFirstNames = {
    "Alice",  "Bruno",  "Chen",    "Dmitri", "Elena",  "Farah",  "Gustav",
    "Hana",   "Ivan",   "Jamal",   "Keiko",  "Liam",   "Maya",   "Nikhil",
    "Olga",   "Pedro",  "Quinn",   "Rosa",   "Sven",   "Tariq",  "Uma",
    "Victor", "Wen",    "Ximena",  "Yusuf",  "Zara",   "Amir",   "Bianca",
    "Carlos", "Dalia",  "Emeka",   "Fiona",  "Goran",  "Helga",  "Idris",
    "Jonas",  "Kira",   "Lorenzo", "Mina",   "Nadia",  "Oscar",  "Priya",
    "Rafael", "Sofia",  "Tomas",   "Ulrich", "Vera",   "Wanda",  "Yara",
    "Zoltan", "Anika",  "Boris",   "Celine", "Dario",  "Esther", "Felix",
    "Greta",  "Hugo",   "Ingrid",  "Jorge"};

const std::vector<std::string> kCities = {
    "Lisbon",   "Madrid",    "Paris",     "Berlin",   "Vienna",   "Prague",
    "Warsaw",   "Oslo",      "Helsinki",  "Dublin",   "Athens",   "Rome",
    "Milan",    "Munich",    "Zurich",    "Geneva",   "Lyon",     "Porto",
    "Seville",  "Valencia",  "Krakow",    "Gdansk",   "Riga",     "Tallinn",
    "Vilnius",  "Budapest",  "Bucharest", "Sofia",    "Belgrade", "Zagreb",
    "Ljubljana","Bratislava","Brno",      "Graz",     "Salzburg", "Hamburg",
    "Cologne",  "Leipzig",   "Dresden",   "Bremen",   "Antwerp",  "Ghent",
    "Utrecht",  "Leiden",    "Bergen",    "Malmo",    "Aarhus",   "Turku",
    "Tampere",  "Cork",      "Galway",    "Nantes",   "Lille",    "Bordeaux",
    "Toulouse", "Marseille", "Naples",    "Turin",    "Bologna",  "Florence"};

const std::vector<std::string> kStatuses = {
    "ACCEPTED", "REJECTED", "APPROVED", "DECLINED",
    "SHIPPED",  "DELIVERED", "OPEN",    "CLOSED"};
const std::vector<std::string> kPlaceholders = {"Unknown", "N/A", "None",
                                                "-",       "TBD", "?"};
const std::vector<std::string> kErrorTokens = {"#REF!", "#DIV/0!", "#N/A",
                                               "#VALUE!"};
const std::vector<std::string> kRemarks = {
    "Call back", "Follow up", "Paid in full", "Urgent",  "Reviewed",
    "Escalated", "On hold",   "Confirmed",    "Resolved", "Scheduled"};
const std::vector<std::string> kChannels = {"Online",  "Retail", "Wholesale",
                                            "Partner", "Direct", "Export"};

std::string Cents(std::int64_t cents) {
  char buf[64];
  const char* sign = cents < 0 ? "-" : "";
  const std::int64_t a = cents < 0 ? -cents : cents;
  std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", sign,
                static_cast<long long>(a / 100), static_cast<long long>(a % 100));
  return buf;
}

std::string IsoDate(int y, int m, int d) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

// k distinct positions in [0, n).
std::vector<std::size_t> Positions(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.Shuffle(&idx);
  idx.resize(std::min(k, n));
  return idx;
}

std::vector<std::string> Amounts(Rng& rng, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Cents(rng.Between(1000, 99999)));
  return out;
}

Column ErrorColumn(Rng& rng, std::size_t n) {
  Column c;
  c.header = rng.Pick(std::vector<std::string>{
      "Amount", "Cost", "Balance", "Payment", "Net Value", "Charge", "Fee"});
  c.cells = Amounts(rng, n);
  const std::size_t k = static_cast<std::size_t>(
      rng.Between(1, static_cast<std::int64_t>(std::max<std::size_t>(1, n / 6))));
  for (std::size_t i : Positions(rng, n, k)) c.cells[i] = rng.Pick(kErrorTokens);
  c.op = OperationCF::kIsError;
  c.params = {ParamValue::ErrorValue()};
  return c;
}

Column BlankColumn(Rng& rng, std::size_t n) {
  Column c;
  if (rng.Chance(0.5)) {
    c.header = rng.Pick(std::vector<std::string>{"Deposit", "Refund",
                                                 "Bonus", "Discount"});
    c.cells = Amounts(rng, n);
  } else {
    c.header = rng.Pick(
        std::vector<std::string>{"Remarks", "Comment", "Notes", "Follow-up"});
    for (std::size_t i = 0; i < n; ++i) c.cells.push_back(rng.Pick(kRemarks));
  }
  const std::size_t k = static_cast<std::size_t>(
      rng.Between(1, static_cast<std::int64_t>(std::max<std::size_t>(1, n / 4))));
  for (std::size_t i : Positions(rng, n, k)) c.cells[i].clear();
  c.op = OperationCF::kIsBlank;
  c.params = {ParamValue::Blank()};
  return c;
}

Column DuplicateColumn(Rng& rng, std::size_t n) {
  Column c;
  c.header = rng.Pick(std::vector<std::string>{"Customer", "Employee", "Owner",
                                               "Supplier", "Agent"});
  std::vector<std::string> names = kFirstNames;
  rng.Shuffle(&names);
  std::size_t next = 0;
  const std::size_t singles = static_cast<std::size_t>(
      rng.Between(1, static_cast<std::int64_t>(n / 2)));
  std::size_t remaining = n - singles;
  while (remaining > 0) {
    std::size_t count = remaining <= 3 ? remaining
                                       : static_cast<std::size_t>(rng.Between(2, 3));
    if (remaining - count == 1) count = remaining;  // no orphan single
    for (std::size_t i = 0; i < count; ++i) c.cells.push_back(names[next]);
    ++next;
    remaining -= count;
  }
  for (std::size_t i = 0; i < singles; ++i) c.cells.push_back(names[next++]);
  rng.Shuffle(&c.cells);
  c.op = OperationCF::kIsDuplicate;
  return c;
}

Column TopKColumn(Rng& rng, std::size_t n) {
  Column c;
  c.header = rng.Pick(std::vector<std::string>{"Score", "Points", "Rating",
                                               "Marks", "Result"});
  const std::int64_t hi = std::max<std::int64_t>(99, 40 + 2 * static_cast<std::int64_t>(n));
  std::vector<std::int64_t> pool;
  for (std::int64_t v = 40; v <= hi; ++v) pool.push_back(v);
  rng.Shuffle(&pool);
  for (std::size_t i = 0; i < n; ++i) c.cells.push_back(std::to_string(pool[i]));
  c.op = OperationCF::kTopBottomK;
  c.params = {ParamValue::Number(3)};
  return c;
}

// Symmetric around a threshold that is not itself a cell; n must be even.
Column MeanSplitColumn(Rng& rng, std::size_t n) {
  Column c;
  c.header = rng.Pick(std::vector<std::string>{"Temperature", "Deviation",
                                               "Margin", "Change", "Offset"});
  std::int64_t center = 0;
  do {
    center = rng.Between(2000, 50000);
  } while (center % 100 == 0);
  const std::size_t pairs = n / 2;
  std::set<std::int64_t> deltas;
  while (deltas.size() < pairs) deltas.insert(rng.Between(50, center - 50));
  for (std::int64_t d : deltas) {
    c.cells.push_back(Cents(center - d));
    c.cells.push_back(Cents(center + d));
  }
  rng.Shuffle(&c.cells);
  c.op = OperationCF::kLessGreaterThan;
  c.params = {ParamValue::Number(static_cast<double>(center) / 100.0)};
  return c;
}

Column StatusColumn(Rng& rng, std::size_t n) {
  Column c;
  c.header = rng.Pick(std::vector<std::string>{"Status", "State", "Decision",
                                               "Outcome", "Review"});
  std::vector<std::string> statuses = kStatuses;
  rng.Shuffle(&statuses);
  statuses.resize(static_cast<std::size_t>(rng.Between(2, 4)));
  const std::string token = rng.Pick(kPlaceholders);
  for (std::size_t i = 0; i < n; ++i) c.cells.push_back(rng.Pick(statuses));
  const std::size_t k = static_cast<std::size_t>(
      rng.Between(1, static_cast<std::int64_t>(std::max<std::size_t>(1, n / 5))));
  for (std::size_t i : Positions(rng, n, k)) c.cells[i] = token;
  c.op = OperationCF::kEqualContains;
  c.params = {ParamValue::Text(token)};
  return c;
}

Column GradientColumn(Rng& rng, std::size_t n) {
  Column c;
  c.header = rng.Pick(std::vector<std::string>{
      "Progress", "Completion", "Utilization", "Satisfaction", "Coverage"});
  c.cells = {"0", "100"};
  for (std::size_t i = 2; i < n; ++i) {
    c.cells.push_back(std::to_string(rng.Between(1, 99)));
  }
  rng.Shuffle(&c.cells);
  c.op = OperationCF::kColorScale;
  c.params = {ParamValue::Number(0), ParamValue::Number(100)};
  return c;
}

Column IdColumn(Rng& rng, std::size_t n) {
  Column c;
  c.header = rng.Pick(std::vector<std::string>{"ID", "Code", "Ref"});
  const char prefix = static_cast<char>('A' + rng.Below(26));
  std::vector<std::int64_t> pool;
  for (std::int64_t v = 1000; v < 1000 + 4 * static_cast<std::int64_t>(n) + 10; ++v) {
    pool.push_back(v);
  }
  rng.Shuffle(&pool);
  for (std::size_t i = 0; i < n; ++i) {
    c.cells.push_back(std::string(1, prefix) + "-" + std::to_string(pool[i]));
  }
  return c;
}

Column PatternColumn(Rng& rng, OperationCF op, std::size_t n) {
  switch (op) {
    case OperationCF::kIsError: return ErrorColumn(rng, n);
    case OperationCF::kIsBlank: return BlankColumn(rng, n);
    case OperationCF::kIsDuplicate: return DuplicateColumn(rng, n);
    case OperationCF::kTopBottomK: return TopKColumn(rng, n);
    case OperationCF::kLessGreaterThan: return MeanSplitColumn(rng, n);
    case OperationCF::kEqualContains: return StatusColumn(rng, n);
    case OperationCF::kColorScale: return GradientColumn(rng, n);
    default: break;
  }
  throw Error(ErrorCode::kInvalidSpec,
              std::string("no synthetic pattern for ") + OperationName(op));
}

bool Synthesizable(OperationCF op) {
  switch (op) {
    case OperationCF::kIsError:
    case OperationCF::kIsBlank:
    case OperationCF::kIsDuplicate:
    case OperationCF::kTopBottomK:
    case OperationCF::kLessGreaterThan:
    case OperationCF::kEqualContains:
    case OperationCF::kColorScale:
      return true;
    default:
      return false;
  }
}

OperationCF DrawPattern(Rng& rng, const PatternMix& mix) {
  double total = 0.0;
  for (const auto& [op, w] : mix) total += w;
  double u = rng.Unit() * total;
  for (const auto& [op, w] : mix) {
    if (w <= 0.0) continue;
    if (u < w) return op;
    u -= w;
  }
  for (auto it = mix.rbegin(); it != mix.rend(); ++it) {
    if (it->second > 0.0) return it->first;
  }
  return mix.begin()->first;
}

Table Assemble(const std::string& id, std::vector<Column>* columns,
               Rng& rng, std::vector<std::size_t>* position) {
  std::vector<std::size_t> order(columns->size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(&order);
  position->assign(columns->size(), 0);
  std::vector<std::string> headers;
  const std::size_t n = columns->front().cells.size();
  std::vector<std::vector<std::string>> rows(n);
  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    const Column& c = (*columns)[order[slot]];
    (*position)[order[slot]] = slot;
    headers.push_back(c.header);
    for (std::size_t r = 0; r < n; ++r) rows[r].push_back(c.cells[r]);
  }
  return MakeTable(id, std::move(headers), rows);
}

void CFTable(Rng& rng, const SynthSpec& spec, const std::string& id,
             Corpus* out) {
  const std::size_t n_labeled = static_cast<std::size_t>(
      rng.Between(1, static_cast<std::int64_t>(spec.max_cf_fields)));
  std::vector<OperationCF> ops;
  for (std::size_t i = 0; i < n_labeled; ++i) {
    ops.push_back(DrawPattern(rng, spec.pattern_mix));
  }
  std::size_t n = static_cast<std::size_t>(
      rng.Between(static_cast<std::int64_t>(spec.min_rows),
                  static_cast<std::int64_t>(spec.max_rows)));
  const bool needs_even =
      std::count(ops.begin(), ops.end(), OperationCF::kLessGreaterThan) > 0;
  if (needs_even && n % 2 == 1) n = n + 1 <= spec.max_rows ? n + 1 : n - 1;
  std::vector<Column> columns;
  for (OperationCF op : ops) columns.push_back(PatternColumn(rng, op, n));
  if (rng.Chance(0.5)) columns.push_back(IdColumn(rng, n));
  std::vector<std::size_t> position;
  Table t = Assemble(id, &columns, rng, &position);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (!columns[i].op) continue;
    out->records.push_back(
        AnalysisRecord::CF(id, position[i], *columns[i].op, columns[i].params));
  }
  out->tables.push_back(std::move(t));
}

void ChartTable(Rng& rng, const SynthSpec& spec, const std::string& id,
                Corpus* out) {
  const double u = rng.Unit();
  std::vector<Column> columns;
  std::vector<std::size_t> x_cols, y_cols;
  ChartType type;
  std::size_t n = static_cast<std::size_t>(
      rng.Between(static_cast<std::int64_t>(spec.min_rows),
                  static_cast<std::int64_t>(spec.max_rows)));
  auto numeric = [&](const std::vector<std::string>& headers, std::int64_t lo,
                     std::int64_t hi, bool cents) {
    Column c;
    c.header = rng.Pick(headers);
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t v = rng.Between(lo, hi);
      c.cells.push_back(cents ? Cents(v) : std::to_string(v));
    }
    return c;
  };
  if (u < 0.3) {
    type = ChartType::kLine;
    Column date;
    date.header = rng.Pick(std::vector<std::string>{"Date", "Month", "Period",
                                                    "Week Of"});
    int y = static_cast<int>(rng.Between(2015, 2023));
    int m = static_cast<int>(rng.Between(1, 12));
    const bool monthly = rng.Chance(0.5);
    int d = monthly ? 1 : static_cast<int>(rng.Between(1, 28 - static_cast<std::int64_t>(n % 28)));
    for (std::size_t i = 0; i < n; ++i) {
      if (monthly) {
        date.cells.push_back(IsoDate(y, m, 1));
        if (++m > 12) {
          m = 1;
          ++y;
        }
      } else {
        date.cells.push_back(IsoDate(y, m, d));
        if (++d > 28) {
          d = 1;
          if (++m > 12) {
            m = 1;
            ++y;
          }
        }
      }
    }
    columns.push_back(std::move(date));
    x_cols.push_back(0);
    const std::size_t ys = rng.Chance(0.3) ? 2 : 1;
    for (std::size_t i = 0; i < ys; ++i) {
      columns.push_back(numeric({"Revenue", "Sales", "Visitors", "Orders",
                                 "Signups"},
                                1000, 99999, i == 0));
      y_cols.push_back(columns.size() - 1);
    }
  } else if (u < 0.6) {
    type = ChartType::kBar;
    Column cat;
    cat.header = rng.Pick(std::vector<std::string>{"City", "Branch", "Office",
                                                   "Store"});
    std::vector<std::string> cities = kCities;
    rng.Shuffle(&cities);
    cities.resize(n);
    cat.cells = cities;
    columns.push_back(std::move(cat));
    x_cols.push_back(0);
    columns.push_back(numeric({"Units", "Headcount", "Sales", "Tickets"}, 10,
                              5000, false));
    y_cols.push_back(1);
  } else if (u < 0.8) {
    type = ChartType::kPie;
    n = static_cast<std::size_t>(rng.Between(3, 6));
    Column cat;
    cat.header = rng.Pick(std::vector<std::string>{"Channel", "Segment",
                                                   "Source"});
    std::vector<std::string> ch = kChannels;
    rng.Shuffle(&ch);
    ch.resize(n);
    cat.cells = ch;
    columns.push_back(std::move(cat));
    columns.push_back(numeric({"Share", "Portion", "Percent"}, 1, 60, false));
    y_cols.push_back(1);
  } else {
    type = ChartType::kScatter;
    Column x;
    x.header = rng.Pick(std::vector<std::string>{"Height", "Distance",
                                                 "Weight", "Speed"});
    std::set<std::int64_t> used;
    while (used.size() < n) used.insert(rng.Between(1000, 9999));
    std::vector<std::int64_t> xs(used.begin(), used.end());
    rng.Shuffle(&xs);
    for (std::int64_t v : xs) x.cells.push_back(std::to_string(v / 10) + "." +
                                               std::to_string(v % 10));
    columns.push_back(std::move(x));
    x_cols.push_back(0);
    columns.push_back(numeric({"Score", "Price", "Rate", "Total"}, 1, 10,
                              false));
    y_cols.push_back(1);
  }
  std::vector<std::size_t> position;
  Table t = Assemble(id, &columns, rng, &position);
  std::vector<std::size_t> x, y;
  for (std::size_t i : x_cols) x.push_back(position[i]);
  for (std::size_t i : y_cols) y.push_back(position[i]);
  std::sort(y.begin(), y.end());
  out->records.push_back(AnalysisRecord::Chart(id, type, x, y));
  out->tables.push_back(std::move(t));
}

}  // namespace

PatternMix DefaultPatternMix() {
  return {{OperationCF::kEqualContains, 80932},
          {OperationCF::kColorScale, 71642},
          {OperationCF::kLessGreaterThan, 47245},
          {OperationCF::kIsBlank, 21318},
          {OperationCF::kIsError, 7382},
          {OperationCF::kTopBottomK, 3126},
          {OperationCF::kIsDuplicate, 2277}};
}

void SynthSpec::Validate() const {
  if (n_tables == 0) throw Error(ErrorCode::kInvalidSpec, "n_tables must be >= 1");
  if (min_rows < 8 || max_rows < min_rows || max_rows > 60) {
    throw Error(ErrorCode::kInvalidSpec, "rows_range must satisfy 8 <= lo <= hi <= 60");
  }
  if (chart_fraction < 0.0 || chart_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidSpec, "chart_fraction outside [0,1]");
  }
  if (max_cf_fields == 0) {
    throw Error(ErrorCode::kInvalidSpec, "max_cf_fields must be >= 1");
  }
  double total = 0.0;
  for (const auto& [op, w] : pattern_mix) {
    if (!Synthesizable(op)) {
      throw Error(ErrorCode::kInvalidSpec,
                  std::string("no synthetic pattern for ") + OperationName(op));
    }
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidSpec, "negative pattern weight");
    total += w;
  }
  if (chart_fraction < 1.0 && !(total > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "pattern_mix has no positive weight");
  }
}

nlohmann::json SynthSpec::ToJson() const {
  nlohmann::json mix = nlohmann::json::object();
  for (const auto& [op, w] : pattern_mix) mix[OperationName(op)] = w;
  return {{"n_tables", n_tables},
          {"rows_range", {min_rows, max_rows}},
          {"seed", seed},
          {"pattern_mix", std::move(mix)},
          {"chart_fraction", chart_fraction},
          {"max_cf_fields", max_cf_fields}};
}

SynthSpec SynthSpec::FromJson(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.n_tables = j.value("n_tables", s.n_tables);
    if (j.contains("rows_range")) {
      const auto r = j.at("rows_range").get<std::vector<std::size_t>>();
      if (r.size() != 2) throw Error(ErrorCode::kInvalidSpec, "rows_range needs 2 values");
      s.min_rows = r[0];
      s.max_rows = r[1];
    }
    s.seed = j.value("seed", s.seed);
    s.chart_fraction = j.value("chart_fraction", s.chart_fraction);
    s.max_cf_fields = j.value("max_cf_fields", s.max_cf_fields);
    if (j.contains("pattern_mix")) {
      s.pattern_mix.clear();
      for (const auto& [name, w] : j.at("pattern_mix").items()) {
        const auto op = ParseOperation(name);
        if (!op) throw Error(ErrorCode::kInvalidSpec, "unknown pattern " + name);
        s.pattern_mix[*op] = w.get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("bad synth spec: ") + e.what());
  }
  s.Validate();
  return s;
}

Corpus GenerateSynthetic(const SynthSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  Corpus out;
  out.header["generator"] = spec.ToJson();
  for (std::size_t i = 0; i < spec.n_tables; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06zu", i);
    if (rng.Chance(spec.chart_fraction)) {
      ChartTable(rng, spec, id, &out);
    } else {
      CFTable(rng, spec, id, &out);
    }
  }
  return out;
}

}  // namespace tabsem

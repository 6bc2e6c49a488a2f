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

// Brute-force reference for cell signatures, written directly from the
// definitions (quadratic counting, no shared helpers with the library).

#ifndef TABSEM_TESTS_SIGNATURE_ORACLE_HPP_
#define TABSEM_TESTS_SIGNATURE_ORACLE_HPP_

#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tabsem/signatures.hpp"
#include "tabsem/table.hpp"

namespace tabsem::testing {

inline std::string OracleTrim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool OracleSameValue(const Cell& a, const Cell& b) {
  if (a.is_blank() || b.is_blank()) return false;
  if (a.is_number() != b.is_number()) return false;
  if (a.is_number()) return a.number == b.number;
  return OracleTrim(a.raw) == OracleTrim(b.raw);
}

inline bool OracleNear(double a, double b) {
  return std::abs(a - b) <=
         1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::set<std::size_t> OracleRankPositions(std::size_t n) {
  std::set<std::size_t> out;
  for (std::size_t p : {1u, 3u, 5u, 10u, 20u}) {
    if (p <= n) out.insert(p);
  }
  for (int k = 1; k <= 9; ++k) {
    out.insert(static_cast<std::size_t>(
                   std::llround(0.1 * k * static_cast<double>(n - 1))) +
               1);
  }
  return out;
}

inline int OracleLogContribution(double bound) {
  const double a = std::abs(bound);
  if (a <= 1.0) return 0;
  int n = 0;
  double p = 1.0;
  while (p < a) {
    p *= 10.0;
    ++n;
  }
  return n;
}

inline std::vector<CellSignature> OracleCellSignatures(
    const Field& field, const Vocabulary& vocab) {
  const std::vector<Cell>& cells = field.cells;
  const std::size_t n = cells.size();
  std::vector<CellSignature> out(n);
  std::size_t non_blank = 0;
  for (const Cell& c : cells) non_blank += !c.is_blank();

  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) count[i] += OracleSameValue(cells[i], cells[j]);
  }
  std::set<std::size_t> freqs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!cells[i].is_blank()) freqs.insert(count[i]);
  }
  const std::size_t u = freqs.size();
  const auto cut = static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(u)));

  for (std::size_t i = 0; i < n; ++i) {
    CellSignature& s = out[i];
    s.flags.is_blank = cells[i].is_blank();
    s.flags.is_error = cells[i].is_error();
    if (cells[i].is_blank()) continue;
    s.freq_count = count[i];
    s.freq_ratio = static_cast<double>(count[i]) / static_cast<double>(non_blank);
    std::size_t greater = 0;
    for (std::size_t f : freqs) greater += f > count[i];
    s.freq_rank = greater + 1;
    const std::size_t asc_freq = u - s.freq_rank + 1;
    s.flags.is_common_frequency =
        count[i] > 1 && (s.freq_rank <= cut || asc_freq <= cut);
    if (cells[i].is_text()) {
      std::string low = OracleTrim(cells[i].raw);
      for (char& ch : low) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      s.flags.is_meaningless = vocab.meaningless.count(low) > 0;
    }
  }
  if (field.ftype != FieldType::kNumeric) return out;

  std::vector<std::size_t> ranked;
  for (std::size_t i = 0; i < n; ++i) {
    if (cells[i].is_number()) ranked.push_back(i);
  }
  const std::size_t m = ranked.size();
  if (m == 0) return out;
  double lo = cells[ranked[0]].number, hi = lo, sum = 0.0;
  for (std::size_t i : ranked) {
    lo = std::min(lo, cells[i].number);
    hi = std::max(hi, cells[i].number);
    sum += cells[i].number;
  }
  const double mean = sum / static_cast<double>(m);
  const double mid = (hi + lo) / 2.0;
  const double range = hi - lo;
  double step = 1.0;
  if (range > 0.0) {
    while (step * 10.0 <= range) step *= 10.0;
    while (step > range) step /= 10.0;
  }
  const int big_n = std::max(OracleLogContribution(hi), OracleLogContribution(lo));
  const double base = std::pow(10.0, big_n);
  const std::set<std::size_t> positions = OracleRankPositions(m);

  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t i = ranked[a];
    const double x = cells[i].number;
    std::size_t asc = 1, desc = 1;
    for (std::size_t b = 0; b < m; ++b) {
      const double y = cells[ranked[b]].number;
      asc += y < x || (y == x && b < a);
      desc += y > x || (y == x && b < a);
    }
    CellSignature& s = out[i];
    s.asc_rank = asc;
    s.desc_rank = desc;
    s.range_minmax = range > 0.0 ? (x - lo) / range : 0.0;
    s.range_log = (x - base) / (2.0 * base);
    s.percentile_minmax =
        m > 1 ? static_cast<double>(asc - 1) / static_cast<double>(m - 1) : 0.0;
    s.flags.is_common_rank = positions.count(asc) || positions.count(desc);
    bool near_multiple = false;
    if (range > 0.0) {
      const double q = std::round(x / step);
      near_multiple = std::abs(x - q * step) <= 0.005 * range;
    }
    s.flags.is_common_range =
        near_multiple || OracleNear(x, mean) || OracleNear(x, mid);
    for (double e : vocab.empirical) {
      if (OracleNear(e, x)) s.flags.is_empirical = true;
    }
  }
  return out;
}

// A random field of 1..max_cells cells: numbers of mixed scale and sign with
// repeats and empirical values, or text with placeholders; both kinds carry
// blanks and error cells.
inline Field RandomOracleField(std::mt19937_64& rng, std::size_t max_cells) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 1 + rng() % max_cells;
  const bool numeric = u(rng) < 0.7;
  const double scale = std::pow(10.0, static_cast<double>(rng() % 7) - 2.0);
  static const char* kText[] = {"alpha", "beta", "gamma", "Unknown", "n/a", " beta ", "-"};
  static const char* kEmpirical[] = {"0", "1", "50", "100", "0.5", "10"};
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = u(rng);
    std::string v;
    if (r < 0.06) {
      v = "";
    } else if (r < 0.1) {
      v = "#DIV/0!";
    } else if (!pool.empty() && r < 0.3) {
      v = pool[rng() % pool.size()];
    } else if (!numeric) {
      v = kText[rng() % 7];
    } else if (r < 0.38) {
      v = kEmpirical[rng() % 6];
    } else {
      char buf[64];
      const double x = (u(rng) * 2.0 - 0.5) * 100.0 * scale;
      std::snprintf(buf, sizeof(buf), rng() % 2 ? "%.0f" : "%.2f", x);
      v = buf;
    }
    pool.push_back(v);
    rows.push_back({v});
  }
  return MakeTable("oracle", {"h"}, rows).fields[0];
}

// Empty when the signatures agree: integers exactly, reals within 1e-12.
inline std::string SignatureMismatch(const std::vector<CellSignature>& got,
                                     const std::vector<CellSignature>& want) {
  if (got.size() != want.size()) return "length";
  auto real = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  for (std::size_t i = 0; i < got.size(); ++i) {
    const CellSignature& g = got[i];
    const CellSignature& w = want[i];
    const std::string at = " at cell " + std::to_string(i);
    if (g.freq_count != w.freq_count) return "freq_count" + at;
    if (g.freq_rank != w.freq_rank) return "freq_rank" + at;
    if (g.asc_rank != w.asc_rank) return "asc_rank" + at;
    if (g.desc_rank != w.desc_rank) return "desc_rank" + at;
    if (!(g.flags == w.flags)) return "flags" + at;
    if (!real(g.freq_ratio, w.freq_ratio)) return "freq_ratio" + at;
    if (!real(g.range_minmax, w.range_minmax)) return "range_minmax" + at;
    if (!real(g.range_log, w.range_log)) return "range_log" + at;
    if (!real(g.percentile_minmax, w.percentile_minmax)) return "percentile_minmax" + at;
  }
  return {};
}

}  // namespace tabsem::testing

#endif  // TABSEM_TESTS_SIGNATURE_ORACLE_HPP_

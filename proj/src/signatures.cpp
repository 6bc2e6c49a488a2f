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

#include "tabsem/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace tabsem {

namespace {

const std::vector<std::string>& DefaultMeaningless() {
  static const std::vector<std::string> kWords = {
      "none", "n/a", "na", "n.a.", "null", "nil", "unknown", "unk", "-",
      "--", "---", "tbd", "tba", "tbc", "blank", "missing", "pending",
      "empty", "nothing", "not available", "not applicable", "undefined",
      "unspecified", "no data", "no value", "nan", "void", "?", "??", "???",
      "x", "xx", "xxx", "...", ".", "/", "*", "**", "0.0.0", "other",
      "others", "misc", "various", "see notes", "see above", "same",
      "ditto", "no", "not given", "not known", "not set", "not reported",
      "no answer", "no response", "refused", "dummy", "test", "placeholder",
      "default", "#", "~"};
  return kWords;
}

double SignedLog1p(double x) {
  return x < 0 ? -std::log1p(-x) : std::log1p(x);
}

}  // namespace

Vocabulary Vocabulary::Default() {
  Vocabulary v;
  for (const auto& w : DefaultMeaningless()) v.meaningless.insert(w);
  v.empirical = {0,   1,    0.5, 10,   50, 100, 1000, -1, 5,  25,
                 75,  0.25, 0.75, 12,  24, 7,   30,   60, 365, 2};
  v.Normalize();
  return v;
}

void Vocabulary::Normalize() {
  std::set<std::string> lowered;
  for (const auto& w : meaningless) lowered.insert(ToLower(Trim(w)));
  meaningless = std::move(lowered);
  std::sort(empirical.begin(), empirical.end());
  empirical.erase(std::unique(empirical.begin(), empirical.end()),
                  empirical.end());
}

bool Vocabulary::IsMeaningless(std::string_view raw) const {
  return meaningless.count(ToLower(Trim(raw))) > 0;
}

bool Vocabulary::IsEmpirical(double value) const {
  return std::any_of(empirical.begin(), empirical.end(),
                     [&](double e) { return NearlyEqual(e, value); });
}

Keywords Keywords::Default() {
  return Keywords{
      {"category", "categories", "name", "label", "id", "date", "time",
       "year", "month"},
      {"value", "values", "amount", "count", "total", "price", "score",
       "rate"}};
}

SignatureConfig SignatureConfig::FromJsonText(std::string_view text) {
  SignatureConfig cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "config: not an object");
  try {
    if (j.contains("meaningless")) {
      cfg.vocab.meaningless.clear();
      for (const auto& w : j["meaningless"]) {
        cfg.vocab.meaningless.insert(w.get<std::string>());
      }
    }
    if (j.contains("empirical")) {
      cfg.vocab.empirical = j["empirical"].get<std::vector<double>>();
    }
    if (j.contains("keywords_x")) {
      cfg.keywords.x = j["keywords_x"].get<std::vector<std::string>>();
    }
    if (j.contains("keywords_y")) {
      cfg.keywords.y = j["keywords_y"].get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  cfg.vocab.Normalize();
  return cfg;
}

SignatureConfig SignatureConfig::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return FromJsonText(buf.str());
}

std::string SignatureConfig::ToJsonText() const {
  nlohmann::json j;
  j["meaningless"] = std::vector<std::string>(vocab.meaningless.begin(),
                                              vocab.meaningless.end());
  j["empirical"] = vocab.empirical;
  j["keywords_x"] = keywords.x;
  j["keywords_y"] = keywords.y;
  return j.dump(2);
}

bool NearlyEqual(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string CellValueKey(const Cell& cell) {
  if (cell.is_blank()) return {};
  if (cell.is_number()) return "n:" + CanonicalNumber(cell.number);
  return "t:" + Trim(cell.raw);
}

std::array<double, kCellSignatureWidth> CellSignatureVector(
    const CellSignature& s) {
  return {std::log1p(static_cast<double>(s.freq_count)),
          s.freq_ratio,
          std::log1p(static_cast<double>(s.freq_rank)),
          std::log1p(static_cast<double>(s.asc_rank)),
          std::log1p(static_cast<double>(s.desc_rank)),
          s.range_minmax,
          s.range_log,
          s.percentile_minmax,
          static_cast<double>(s.flags.is_common_frequency),
          static_cast<double>(s.flags.is_common_rank),
          static_cast<double>(s.flags.is_common_range),
          static_cast<double>(s.flags.is_meaningless),
          static_cast<double>(s.flags.is_empirical),
          static_cast<double>(s.flags.is_blank),
          static_cast<double>(s.flags.is_error)};
}

std::array<double, kFieldSignatureWidth> FieldSignatureVector(
    const FieldSignature& s) {
  std::array<double, kFieldSignatureWidth> v{};
  std::size_t i = 0;
  for (bool b : s.ftype_onehot) v[i++] = b;
  v[i++] = s.header_similarity;
  v[i++] = s.has_keyword_x;
  v[i++] = s.has_keyword_y;
  v[i++] = s.is_common_cardinality;
  v[i++] = s.is_common_range;
  v[i++] = s.is_common_affix;
  v[i++] = s.is_common_header;
  v[i++] = s.is_common_type;
  v[i++] = s.is_date_format;
  for (double m : s.metadata) v[i++] = SignedLog1p(m);
  return v;
}

std::vector<std::size_t> CommonRankPositions(std::size_t n) {
  std::set<std::size_t> pos;
  for (std::size_t p : {1, 3, 5, 10, 20}) {
    if (p <= n) pos.insert(p);
  }
  if (n >= 1) {
    for (int k = 1; k <= 9; ++k) {
      const double at = static_cast<double>(k) *
                        static_cast<double>(n - 1) / 10.0;
      pos.insert(static_cast<std::size_t>(std::round(at)) + 1);
    }
  }
  return {pos.begin(), pos.end()};
}

namespace {

struct NumericSummary {
  std::vector<double> values;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

NumericSummary Summarize(const Field& field) {
  NumericSummary s;
  for (const Cell& c : field.cells) {
    if (c.is_number()) s.values.push_back(c.number);
  }
  if (!s.values.empty()) {
    const auto [lo, hi] = std::minmax_element(s.values.begin(),
                                              s.values.end());
    s.min = *lo;
    s.max = *hi;
    s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) /
             static_cast<double>(s.values.size());
  }
  return s;
}

// Largest power of ten that does not exceed `range` (> 0).
double PowerOfTenStep(double range) {
  double step = std::pow(10.0, std::floor(std::log10(range)));
  if (step * 10.0 <= range) step *= 10.0;
  if (step > range) step /= 10.0;
  return step;
}

bool IsNearRoundMultiple(double x, double step, double tolerance) {
  const double m = std::round(x / step);
  return std::abs(x - m * step) <= tolerance;
}

int LogBoundContribution(double bound) {
  const double a = std::abs(bound);
  if (a <= 1.0) return 0;
  return static_cast<int>(std::ceil(std::log10(a)));
}

}  // namespace

std::vector<double> CommonRangeValues(const Field& field) {
  const NumericSummary s = Summarize(field);
  if (field.ftype != FieldType::kNumeric || s.values.empty()) {
    throw Error(ErrorCode::kNotNumeric,
                "field '" + field.header + "' has no numeric range");
  }
  std::vector<double> out = {s.mean, (s.max + s.min) / 2.0};
  const double range = s.max - s.min;
  if (range > 0.0) {
    const double step = PowerOfTenStep(range);
    const double tol = kRoundMultipleTolerance * range;
    for (double x : s.values) {
      if (IsNearRoundMultiple(x, step, tol)) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> unique;
  for (double x : out) {
    if (unique.empty() || !NearlyEqual(unique.back(), x)) unique.push_back(x);
  }
  return unique;
}

std::vector<CellSignature> ComputeCellSignatures(const Field& field,
                                                 const Vocabulary& vocab) {
  const std::size_t n = field.cells.size();
  std::vector<CellSignature> sigs(n);

  // Frequency signatures over non-blank cells.
  std::vector<std::string> keys(n);
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t non_blank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = CellValueKey(field.cells[i]);
    if (keys[i].empty()) continue;
    ++non_blank;
    ++counts[keys[i]];
  }
  std::vector<std::size_t> distinct_freqs;
  for (const auto& [key, count] : counts) distinct_freqs.push_back(count);
  std::sort(distinct_freqs.begin(), distinct_freqs.end(), std::greater<>());
  distinct_freqs.erase(
      std::unique(distinct_freqs.begin(), distinct_freqs.end()),
      distinct_freqs.end());
  const std::size_t n_freqs = distinct_freqs.size();
  const auto common_freq_cut = static_cast<std::size_t>(
      std::ceil(kCommonFrequencyShare * static_cast<double>(n_freqs)));

  for (std::size_t i = 0; i < n; ++i) {
    const Cell& c = field.cells[i];
    CellSignature& s = sigs[i];
    s.flags.is_blank = c.is_blank();
    s.flags.is_error = c.is_error();
    if (keys[i].empty()) continue;
    s.freq_count = counts[keys[i]];
    s.freq_ratio = static_cast<double>(s.freq_count) /
                   static_cast<double>(non_blank);
    const auto it = std::find(distinct_freqs.begin(), distinct_freqs.end(),
                              s.freq_count);
    s.freq_rank = static_cast<std::size_t>(it - distinct_freqs.begin()) + 1;
    const std::size_t asc_freq_rank = n_freqs - s.freq_rank + 1;
    s.flags.is_common_frequency =
        s.freq_count > 1 &&
        (s.freq_rank <= common_freq_cut || asc_freq_rank <= common_freq_cut);
    if (c.is_text()) s.flags.is_meaningless = vocab.IsMeaningless(c.raw);
  }

  if (field.ftype != FieldType::kNumeric) return sigs;

  // Rank and range signatures over number cells.
  std::vector<std::size_t> ranked;
  for (std::size_t i = 0; i < n; ++i) {
    if (field.cells[i].is_number()) ranked.push_back(i);
  }
  if (ranked.empty()) return sigs;
  const std::size_t m = ranked.size();
  auto value = [&](std::size_t i) { return field.cells[i].number; };
  std::vector<std::size_t> asc = ranked;
  std::stable_sort(asc.begin(), asc.end(), [&](std::size_t a, std::size_t b) {
    return value(a) < value(b);
  });
  std::vector<std::size_t> desc = ranked;
  std::stable_sort(desc.begin(), desc.end(),
                   [&](std::size_t a, std::size_t b) {
                     return value(a) > value(b);
                   });
  for (std::size_t p = 0; p < m; ++p) {
    sigs[asc[p]].asc_rank = p + 1;
    sigs[desc[p]].desc_rank = p + 1;
  }

  const double lo = value(asc.front());
  const double hi = value(asc.back());
  const int log_n = std::max(LogBoundContribution(hi), LogBoundContribution(lo));
  const double log_base = std::pow(10.0, log_n);
  const std::vector<std::size_t> positions = CommonRankPositions(m);
  const std::vector<double> range_values = CommonRangeValues(field);
  auto in_range_values = [&](double x) {
    return std::any_of(range_values.begin(), range_values.end(),
                       [&](double r) { return NearlyEqual(r, x); });
  };
  auto is_position = [&](std::size_t p) {
    return std::binary_search(positions.begin(), positions.end(), p);
  };

  for (std::size_t i : ranked) {
    CellSignature& s = sigs[i];
    const double x = value(i);
    s.range_minmax = hi > lo ? (x - lo) / (hi - lo) : 0.0;
    s.range_log = (x - log_base) / (2.0 * log_base);
    s.percentile_minmax =
        m > 1 ? static_cast<double>(s.asc_rank - 1) / static_cast<double>(m - 1)
              : 0.0;
    s.flags.is_common_rank = is_position(s.asc_rank) || is_position(s.desc_rank);
    s.flags.is_common_range = in_range_values(x);
    s.flags.is_empirical = vocab.IsEmpirical(x);
  }
  return sigs;
}

namespace {

std::vector<std::string> Trigrams(std::string_view s) {
  const std::string lower = ToLower(s);
  std::vector<std::string> grams;
  if (lower.empty()) return grams;
  if (lower.size() < 3) {
    grams.push_back(lower);
    return grams;
  }
  for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
    grams.push_back(lower.substr(i, 3));
  }
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

double Entropy(const std::unordered_map<std::string, std::size_t>& counts,
               std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [k, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

bool ContainsAny(const std::string& haystack,
                 const std::vector<std::string>& needles) {
  return std::any_of(needles.begin(), needles.end(), [&](const auto& w) {
    return !w.empty() && haystack.find(ToLower(w)) != std::string::npos;
  });
}

}  // namespace

double TrigramJaccard(std::string_view a, std::string_view b) {
  const auto ga = Trigrams(a);
  const auto gb = Trigrams(b);
  if (ga.empty() && gb.empty()) return 0.0;
  std::vector<std::string> inter;
  std::set_intersection(ga.begin(), ga.end(), gb.begin(), gb.end(),
                        std::back_inserter(inter));
  const std::size_t uni = ga.size() + gb.size() - inter.size();
  return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

double HeaderSimilarity(std::string_view target,
                        std::span<const std::string> others) {
  double best = 0.0;
  for (const auto& o : others) best = std::max(best, TrigramJaccard(target, o));
  return best;
}

FieldSignature ComputeFieldSignature(const Table& table,
                                     std::size_t field_index,
                                     const Vocabulary& vocab,
                                     const Keywords& keywords) {
  (void)vocab;
  const Field& field = table.field(field_index);
  FieldSignature sig;
  sig.ftype_onehot = {field.ftype == FieldType::kNumeric,
                      field.ftype == FieldType::kString,
                      field.ftype == FieldType::kDateTime};

  std::vector<std::string> others;
  for (const Field& f : table.fields) {
    if (f.index != field.index) others.push_back(f.header);
  }
  sig.header_similarity = HeaderSimilarity(field.header, others);
  sig.is_common_header = sig.header_similarity > kCommonHeaderThreshold;
  const std::string header = ToLower(field.header);
  sig.has_keyword_x = ContainsAny(header, keywords.x);
  sig.has_keyword_y = ContainsAny(header, keywords.y);

  std::unordered_map<std::string, std::size_t> counts;
  std::unordered_map<std::string, std::size_t> char_counts;
  std::size_t non_blank = 0;
  std::size_t total_chars = 0;
  std::size_t blanks = 0;
  std::size_t changes = 0;
  std::size_t pairs = 0;
  std::string prev_key;
  std::unordered_map<char, std::size_t> first_chars;
  std::unordered_map<char, std::size_t> last_chars;
  std::size_t text_cells = 0;
  for (const Cell& c : field.cells) {
    const std::string key = CellValueKey(c);
    if (key.empty()) {
      ++blanks;
      continue;
    }
    ++non_blank;
    ++counts[key];
    const std::string raw = Trim(c.raw);
    for (char ch : raw) {
      ++char_counts[std::string(1, ch)];
      ++total_chars;
    }
    if (c.is_text()) {
      ++text_cells;
      ++first_chars[raw.front()];
      ++last_chars[raw.back()];
    }
    if (!prev_key.empty()) {
      ++pairs;
      changes += key != prev_key;
    }
    prev_key = key;
  }

  const double cardinality =
      non_blank ? static_cast<double>(counts.size()) / non_blank : 0.0;
  sig.is_common_cardinality =
      non_blank > 0 && cardinality > kCommonCardinalityThreshold;

  if (text_cells >= 2) {
    auto top_share = [&](const std::unordered_map<char, std::size_t>& m) {
      std::size_t best = 0;
      for (const auto& [ch, cnt] : m) best = std::max(best, cnt);
      return static_cast<double>(best) / static_cast<double>(text_cells);
    };
    sig.is_common_affix = top_share(first_chars) >= kCommonAffixShare ||
                          top_share(last_chars) >= kCommonAffixShare;
  }

  const NumericSummary num = Summarize(field);
  if (field.ftype == FieldType::kNumeric && !num.values.empty()) {
    const double total = static_cast<double>(num.values.size());
    const auto unit = std::count_if(num.values.begin(), num.values.end(),
                                    [](double x) { return x >= 0 && x <= 1; });
    const auto pct = std::count_if(num.values.begin(), num.values.end(),
                                   [](double x) { return x >= 1 && x <= 100; });
    sig.is_common_range =
        static_cast<double>(unit) / total > kCommonFieldRangeThreshold ||
        static_cast<double>(pct) / total > kCommonFieldRangeThreshold;
  }

  sig.is_common_type = field.ftype != FieldType::kString ||
                       (non_blank > 0 && !sig.is_common_cardinality);
  static const std::vector<std::string> kDateWords = {
      "date", "time", "year", "month", "day", "quarter", "week"};
  sig.is_date_format =
      field.ftype == FieldType::kDateTime || ContainsAny(header, kDateWords);

  FieldMetadata& md = sig.metadata;
  md[0] = cardinality;
  md[1] = Entropy(counts, non_blank);
  md[2] = Entropy(char_counts, total_chars);
  if (!num.values.empty()) {
    double var = 0.0;
    std::size_t negatives = 0;
    for (double x : num.values) {
      var += (x - num.mean) * (x - num.mean);
      negatives += x < 0;
    }
    var /= static_cast<double>(num.values.size());
    md[3] = num.mean;
    md[4] = var;
    md[5] = num.min;
    md[6] = num.max;
    md[7] = num.max - num.min;
    md[10] = static_cast<double>(negatives) /
             static_cast<double>(num.values.size());
  }
  md[8] = 0.0;
  md[9] = pairs ? static_cast<double>(changes) / pairs : 0.0;
  md[11] = field.cells.empty()
               ? 0.0
               : static_cast<double>(blanks) / field.cells.size();
  std::istringstream words(field.header);
  md[12] = static_cast<double>(std::distance(
      std::istream_iterator<std::string>(words),
      std::istream_iterator<std::string>()));
  for (double& v : md) {
    if (!std::isfinite(v)) v = 0.0;
  }
  return sig;
}

std::vector<std::size_t> SampleCells(const Field& field,
                                     std::span<const CellSignature> sigs,
                                     std::size_t cap) {
  (void)field;
  auto priority = [](const CellFlags& f) {
    if (f.is_error) return 0;
    if (f.is_blank) return 1;
    if (f.is_meaningless) return 2;
    if (f.is_empirical) return 3;
    if (f.is_common_rank) return 4;
    if (f.is_common_range) return 5;
    if (f.is_common_frequency) return 6;
    return 7;
  };
  std::vector<std::pair<int, std::size_t>> flagged;
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    const int p = priority(sigs[i].flags);
    if (p < 7) flagged.emplace_back(p, i);
  }
  std::sort(flagged.begin(), flagged.end());
  if (flagged.size() > cap) flagged.resize(cap);
  std::vector<std::size_t> out;
  out.reserve(flagged.size());
  for (const auto& [p, i] : flagged) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tabsem

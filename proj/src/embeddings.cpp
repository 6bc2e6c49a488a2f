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

#include "tabsem/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tabsem/error.hpp"

namespace tabsem {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Fnv1a64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ SplitMix64(seed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string TextHash(std::string_view text) {
  const std::uint64_t h = Fnv1a64(TruncateTokens(text));
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[(h >> (4 * (15 - i))) & 0xF];
  }
  return out;
}

std::string TruncateTokens(std::string_view text, std::size_t max_tokens) {
  std::istringstream in{std::string(text)};
  std::string token;
  std::string out;
  std::size_t n = 0;
  while (n < max_tokens && in >> token) {
    if (n++) out.push_back(' ');
    out += token;
  }
  return out;
}

HashedNGramEmbedder::HashedNGramEmbedder(std::size_t dim,
                                         std::vector<std::size_t> ngram_sizes,
                                         std::uint64_t seed)
    : dim_(dim), ngram_sizes_(std::move(ngram_sizes)), seed_(seed) {
  if (dim_ == 0) throw Error(ErrorCode::kDimensionMismatch, "dim must be > 0");
}

Vector HashedNGramEmbedder::Embed(std::string_view text) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_));
  const std::string norm = ToLower(TruncateTokens(text));
  if (norm.empty()) return v;
  const std::string padded = "\x02" + norm + "\x03";
  for (std::size_t n : ngram_sizes_) {
    if (n == 0 || padded.size() < n) continue;
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      const std::uint64_t h =
          SplitMix64(Fnv1a64(std::string_view(padded).substr(i, n), seed_));
      const auto slot = static_cast<Eigen::Index>(h % dim_);
      v[slot] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  const double norm2 = v.norm();
  if (norm2 > 0.0) v /= norm2;
  return v;
}

PrecomputedEmbeddings PrecomputedEmbeddings::FromJsonlText(
    std::string_view text) {
  PrecomputedEmbeddings out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto values = j.at("vector").get<std::vector<double>>();
      if (out.dim_ == 0) out.dim_ = values.size();
      if (values.size() != out.dim_ || values.empty()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "embedding line " + std::to_string(lineno));
      }
      out.table_[j.at("text_hash").get<std::string>()] =
          Eigen::Map<const Vector>(values.data(),
                                   static_cast<Eigen::Index>(values.size()));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "embedding line " +
                                         std::to_string(lineno) + ": " +
                                         e.what());
    }
  }
  if (out.dim_ == 0) throw Error(ErrorCode::kEmptyInput, "no embeddings");
  return out;
}

PrecomputedEmbeddings PrecomputedEmbeddings::FromJsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return FromJsonlText(buf.str());
}

Vector PrecomputedEmbeddings::Embed(std::string_view text) const {
  if (TruncateTokens(text).empty()) {
    return Vector::Zero(static_cast<Eigen::Index>(dim_));
  }
  const auto it = table_.find(TextHash(text));
  if (it == table_.end()) return Vector::Zero(static_cast<Eigen::Index>(dim_));
  return it->second;
}

std::string CellText(const Cell& cell) {
  if (cell.is_blank()) return {};
  if (cell.is_number()) return CanonicalNumber(cell.number);
  return TruncateTokens(cell.raw);
}

Vector EmbedCell(const EmbeddingProvider& provider, const Cell& cell) {
  if (cell.is_blank()) {
    return Vector::Zero(static_cast<Eigen::Index>(provider.dimension()));
  }
  return provider.Embed(CellText(cell));
}

Vector EmbedFieldContext(const EmbeddingProvider& provider,
                         const Table& table, std::size_t field_index) {
  const Field& field = table.field(field_index);
  const auto dim = static_cast<Eigen::Index>(provider.dimension());
  Vector out = 2.0 * provider.Embed(field.header);

  const std::size_t n = std::min(field.cells.size(), kContextCells);
  if (n > 0) {
    Vector cells = Vector::Zero(dim);
    for (std::size_t i = 0; i < n; ++i) cells += EmbedCell(provider, field.cells[i]);
    out += cells / static_cast<double>(n);
  }
  if (table.n_fields() > 1) {
    Vector others = Vector::Zero(dim);
    for (const Field& f : table.fields) {
      if (f.index != field.index) others += provider.Embed(f.header);
    }
    out += 0.5 * others / static_cast<double>(table.n_fields() - 1);
  }
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
  return out;
}

}  // namespace tabsem

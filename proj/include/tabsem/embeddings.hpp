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

#ifndef TABSEM_EMBEDDINGS_HPP_
#define TABSEM_EMBEDDINGS_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "tabsem/table.hpp"

namespace tabsem {

using Vector = Eigen::VectorXd;

// Text -> fixed-size vector. Implementations must be deterministic and safe
// to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Vector Embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
};

// Signed feature hashing of character n-grams, L2-normalized. Text is
// lowercased and wrapped in boundary markers before n-gram extraction.
class HashedNGramEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedNGramEmbedder(std::size_t dim = 64,
                               std::vector<std::size_t> ngram_sizes = {2, 3},
                               std::uint64_t seed = 0);

  Vector Embed(std::string_view text) const override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
  std::vector<std::size_t> ngram_sizes_;
  std::uint64_t seed_;
};

// Precomputed vectors keyed by TextHash(text); one JSON object
// {"text_hash": "<16 hex digits>", "vector": [...]} per line. Unknown texts
// embed to the zero vector.
class PrecomputedEmbeddings final : public EmbeddingProvider {
 public:
  static PrecomputedEmbeddings FromJsonl(const std::string& path);
  static PrecomputedEmbeddings FromJsonlText(std::string_view text);

  Vector Embed(std::string_view text) const override;
  std::size_t dimension() const override { return dim_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, Vector> table_;
};

// Whitespace tokens beyond this count are dropped before embedding.
inline constexpr std::size_t kMaxCellTokens = 30;
// Cells of the target field that contribute to its context embedding.
inline constexpr std::size_t kContextCells = 50;

std::uint64_t Fnv1a64(std::string_view s, std::uint64_t seed = 0);
// Hex FNV-1a of the truncated text; the key of PrecomputedEmbeddings.
std::string TextHash(std::string_view text);

// Keeps the first kMaxCellTokens whitespace tokens joined by single spaces.
std::string TruncateTokens(std::string_view text,
                           std::size_t max_tokens = kMaxCellTokens);

// The text a cell is embedded as; empty for blank cells.
std::string CellText(const Cell& cell);

Vector EmbedCell(const EmbeddingProvider& provider, const Cell& cell);

// normalize(2 * header + 1 * mean(first 50 cells) + 0.5 * mean(other
// headers)).
Vector EmbedFieldContext(const EmbeddingProvider& provider,
                         const Table& table, std::size_t field_index);

}  // namespace tabsem

#endif  // TABSEM_EMBEDDINGS_HPP_

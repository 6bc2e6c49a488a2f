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

#ifndef TABSEM_FEATURIZE_HPP_
#define TABSEM_FEATURIZE_HPP_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tabsem/corpus.hpp"
#include "tabsem/embeddings.hpp"
#include "tabsem/model.hpp"
#include "tabsem/semantics.hpp"
#include "tabsem/signatures.hpp"

namespace tabsem {

struct FeatureContext {
  std::shared_ptr<const EmbeddingProvider> provider;
  SignatureConfig signatures;
  std::size_t sample_cap = kDefaultSampleCap;
  bool zero_statistical = false;  // signature vectors become zeros
  bool zero_linguistic = false;   // embeddings become zeros
};

// Model inputs and statistics for one field.
struct CFFeatures {
  std::vector<CellSignature> cell_sigs;  // every cell of the field
  FieldSignature field_sig;
  std::vector<std::size_t> sampled;  // sampled cell indices, ascending
  ModelInput input;                  // one cell row per sampled cell
};

CFFeatures FeaturizeField(const Table& table, std::size_t field_index,
                          const FeatureContext& ctx);

// Model inputs for a whole table: one row per field.
struct ChartFeatures {
  std::vector<FieldSignature> field_sigs;
  ModelInput input;
};

ChartFeatures FeaturizeTable(const Table& table, const FeatureContext& ctx);

// Positions in `sampled` whose cells carry the candidate. A mean or
// midpoint without such a cell anchors to the sampled number cells closest
// in value (all of them on ties); other candidates without carrying cells
// have no anchors.
std::vector<std::size_t> AnchorPositions(const ParamCandidate& candidate,
                                         const Field& field,
                                         std::span<const std::size_t> sampled);

// Candidate behind a gold parameter: the matching entry of the field's full
// candidate set, or the cells holding the value when it has none.
ParamCandidate GoldCandidate(const ParamValue& value, OperationCF op,
                             const Field& field,
                             std::span<const ParamCandidate> all_candidates);

// Candidates over every focus valid for the field type.
std::vector<ParamCandidate> AllCandidates(const Field& field,
                                          std::span<const CellSignature> sigs,
                                          const Vocabulary& vocab);

// Intent one-hot, focus and operation multi-hot, and reference labels on
// the anchors of every gold parameter.
Labels MakeCFLabels(const Field& field, const CFFeatures& features,
                    std::span<const AnalysisRecord> gold,
                    const Vocabulary& vocab, CFSemantics* semantics);

// Intent, focus and chart-type multi-hot; per-field {is_x, is_y}.
Labels MakeChartLabels(const Table& table, const ChartFeatures& features,
                       std::span<const AnalysisRecord> gold,
                       ChartSemantics* semantics);

struct CFExample {
  std::size_t table = 0;  // index into Corpus::tables
  std::size_t field_index = 0;
  std::vector<AnalysisRecord> gold;
  CFSemantics semantics;
  CFFeatures features;  // `input` is moved into `example`
  TrainingExample example;
};

struct ChartExample {
  std::size_t table = 0;
  std::vector<AnalysisRecord> gold;
  ChartSemantics semantics;
  ChartFeatures features;  // `input` is moved into `example`
  TrainingExample example;
};

// One CF example per field carrying CF records, one chart example per table
// carrying chart records. Tables are featurized on `workers` threads; the
// output order follows the corpus.
struct Dataset {
  std::vector<CFExample> cf;
  std::vector<ChartExample> chart;
};

Dataset BuildDataset(const Corpus& corpus, const FeatureContext& ctx,
                     std::size_t workers = 1);

// Runs fn(i) for i in [0, n) on up to `workers` threads with a static
// interleaved assignment; rethrows the first failure.
void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace tabsem

#endif  // TABSEM_FEATURIZE_HPP_

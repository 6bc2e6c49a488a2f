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

#include "tabsem/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <thread>

#include "tabsem/error.hpp"

namespace tabsem {

namespace {

void SetRowTail(Mat* m, Eigen::Index row, Eigen::Index start,
                std::span<const double> values, bool zero) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    (*m)(row, start + static_cast<Eigen::Index>(i)) = zero ? 0.0 : values[i];
  }
}

Vector MaybeZero(Vector v, bool zero) {
  if (zero) v.setZero();
  return v;
}

bool CellCarries(const Cell& c, const ParamValue& v) {
  switch (v.kind) {
    case ParamKind::kNumber: return c.is_number() && NearlyEqual(c.number, v.number);
    case ParamKind::kText: return !c.is_blank() && Trim(c.raw) == v.text;
    case ParamKind::kBlank: return c.is_blank();
    case ParamKind::kError: return c.is_error();
    case ParamKind::kDuplicate: return false;
  }
  return false;
}

template <typename E>
void SetMultiHot(Vector* v, const std::vector<E>& items) {
  for (E e : items) (*v)(static_cast<Eigen::Index>(e)) = 1.0;
}

}  // namespace

void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

CFFeatures FeaturizeField(const Table& table, std::size_t field_index,
                          const FeatureContext& ctx) {
  const Field& field = table.field(field_index);
  if (!ctx.provider) {
    throw Error(ErrorCode::kInvalidSpec, "no embedding provider");
  }
  const EmbeddingProvider& provider = *ctx.provider;
  const Vocabulary& vocab = ctx.signatures.vocab;
  CFFeatures f;
  f.cell_sigs = ComputeCellSignatures(field, vocab);
  f.field_sig = ComputeFieldSignature(table, field_index, vocab,
                                      ctx.signatures.keywords);
  f.sampled = SampleCells(field, f.cell_sigs, ctx.sample_cap);

  const Eigen::Index e = static_cast<Eigen::Index>(provider.dimension());
  const auto fsig = FieldSignatureVector(f.field_sig);
  f.input.field_rows.resize(1, e + static_cast<Eigen::Index>(fsig.size()));
  f.input.field_rows.row(0).head(e) =
      MaybeZero(EmbedFieldContext(provider, table, field_index),
                ctx.zero_linguistic)
          .transpose();
  SetRowTail(&f.input.field_rows, 0, e, fsig, ctx.zero_statistical);

  const Eigen::Index b = static_cast<Eigen::Index>(f.sampled.size());
  f.input.cell_rows.resize(b, e + static_cast<Eigen::Index>(
                                      kCellSignatureWidth));
  std::map<std::string, Vector> cache;
  for (Eigen::Index k = 0; k < b; ++k) {
    const std::size_t idx = f.sampled[static_cast<std::size_t>(k)];
    const Cell& cell = field.cells[idx];
    auto it = cache.find(cell.raw);
    if (it == cache.end()) {
      it = cache.emplace(cell.raw, EmbedCell(provider, cell)).first;
    }
    f.input.cell_rows.row(k).head(e) =
        MaybeZero(it->second, ctx.zero_linguistic).transpose();
    SetRowTail(&f.input.cell_rows, k, e, CellSignatureVector(f.cell_sigs[idx]),
               ctx.zero_statistical);
  }
  return f;
}

ChartFeatures FeaturizeTable(const Table& table, const FeatureContext& ctx) {
  if (table.n_fields() == 0) {
    throw Error(ErrorCode::kEmptyTable, "table '" + table.id + "' is empty");
  }
  if (!ctx.provider) {
    throw Error(ErrorCode::kInvalidSpec, "no embedding provider");
  }
  const EmbeddingProvider& provider = *ctx.provider;
  ChartFeatures f;
  const Eigen::Index e = static_cast<Eigen::Index>(provider.dimension());
  const Eigen::Index n = static_cast<Eigen::Index>(table.n_fields());
  f.input.field_rows.resize(
      n, e + static_cast<Eigen::Index>(kFieldSignatureWidth));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t fi = static_cast<std::size_t>(i);
    f.field_sigs.push_back(ComputeFieldSignature(
        table, fi, ctx.signatures.vocab, ctx.signatures.keywords));
    f.input.field_rows.row(i).head(e) =
        MaybeZero(EmbedFieldContext(provider, table, fi), ctx.zero_linguistic)
            .transpose();
    SetRowTail(&f.input.field_rows, i, e,
               FieldSignatureVector(f.field_sigs.back()),
               ctx.zero_statistical);
  }
  return f;
}

std::vector<std::size_t> AnchorPositions(const ParamCandidate& candidate,
                                         const Field& field,
                                         std::span<const std::size_t> sampled) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    if (std::binary_search(candidate.cells.begin(), candidate.cells.end(),
                           sampled[k])) {
      out.push_back(k);
    }
  }
  const bool statistic =
      (candidate.sources & (kSourceMean | kSourceMidpoint)) != 0;
  if (!out.empty() || !candidate.value.is_number() || !statistic) {
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    const Cell& c = field.cells[sampled[k]];
    if (c.is_number()) {
      best = std::min(best, std::abs(c.number - candidate.value.number));
    }
  }
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    const Cell& c = field.cells[sampled[k]];
    if (c.is_number() &&
        NearlyEqual(std::abs(c.number - candidate.value.number), best)) {
      out.push_back(k);
    }
  }
  return out;
}

std::vector<ParamCandidate> AllCandidates(const Field& field,
                                          std::span<const CellSignature> sigs,
                                          const Vocabulary& vocab) {
  std::vector<DataFocusCF> focuses;
  for (std::size_t d = 0; d < kNumFocusesCF; ++d) {
    const auto focus = static_cast<DataFocusCF>(d);
    if (FocusValidFor(focus, field.ftype)) focuses.push_back(focus);
  }
  return CandidateParameters(field, sigs, focuses, vocab);
}

ParamCandidate GoldCandidate(const ParamValue& value, OperationCF op,
                             const Field& field,
                             std::span<const ParamCandidate> all_candidates) {
  for (const ParamCandidate& c : all_candidates) {
    if (AcceptsCandidate(op, c) && ParamEquals(c.value, value)) return c;
  }
  ParamCandidate c;
  c.value = value;
  c.sources = op == OperationCF::kTopBottomK ? kSourceRankK : kSourceCell;
  if (op != OperationCF::kTopBottomK) {
    for (std::size_t i = 0; i < field.cells.size(); ++i) {
      if (CellCarries(field.cells[i], value)) c.cells.push_back(i);
    }
  }
  return c;
}

Labels MakeCFLabels(const Field& field, const CFFeatures& features,
                    std::span<const AnalysisRecord> gold,
                    const Vocabulary& vocab, CFSemantics* semantics) {
  const CFSemantics sem =
      LabelSemanticsCF(gold, field, features.cell_sigs, vocab);
  Labels y;
  y.intent = Vector::Zero(kNumIntentsCF);
  y.intent(static_cast<Eigen::Index>(sem.intent)) = 1.0;
  y.focus = Vector::Zero(kNumFocusesCF);
  SetMultiHot(&y.focus, sem.focuses);
  y.op = Vector::Zero(kNumOperations);
  y.ref = Mat::Zero(static_cast<Eigen::Index>(features.sampled.size()), 1);
  const std::vector<ParamCandidate> all =
      AllCandidates(field, features.cell_sigs, vocab);
  for (const AnalysisRecord& r : gold) {
    y.op(static_cast<Eigen::Index>(r.operation)) = 1.0;
    for (const ParamValue& p : r.parameters) {
      const ParamCandidate c = GoldCandidate(p, r.operation, field, all);
      for (std::size_t k : AnchorPositions(c, field, features.sampled)) {
        y.ref(static_cast<Eigen::Index>(k), 0) = 1.0;
      }
    }
  }
  if (semantics != nullptr) *semantics = sem;
  return y;
}

Labels MakeChartLabels(const Table& table, const ChartFeatures& features,
                       std::span<const AnalysisRecord> gold,
                       ChartSemantics* semantics) {
  Labels y;
  y.intent = Vector::Zero(kNumIntentsChart);
  y.focus = Vector::Zero(kNumFocusesChart);
  y.op = Vector::Zero(kNumChartTypes);
  y.ref = Mat::Zero(static_cast<Eigen::Index>(table.n_fields()), 2);
  ChartSemantics merged;
  for (const AnalysisRecord& r : gold) {
    const ChartSemantics s = LabelSemanticsChart(r, table, features.field_sigs);
    merged.intents.insert(merged.intents.end(), s.intents.begin(),
                          s.intents.end());
    merged.focuses.insert(merged.focuses.end(), s.focuses.begin(),
                          s.focuses.end());
    y.op(static_cast<Eigen::Index>(r.chart_type)) = 1.0;
    for (std::size_t x : r.x_fields) {
      y.ref(static_cast<Eigen::Index>(x), 0) = 1.0;
    }
    for (std::size_t v : r.y_fields) {
      y.ref(static_cast<Eigen::Index>(v), 1) = 1.0;
    }
  }
  std::sort(merged.intents.begin(), merged.intents.end());
  merged.intents.erase(
      std::unique(merged.intents.begin(), merged.intents.end()),
      merged.intents.end());
  std::sort(merged.focuses.begin(), merged.focuses.end());
  merged.focuses.erase(
      std::unique(merged.focuses.begin(), merged.focuses.end()),
      merged.focuses.end());
  SetMultiHot(&y.intent, merged.intents);
  SetMultiHot(&y.focus, merged.focuses);
  if (semantics != nullptr) *semantics = std::move(merged);
  return y;
}

Dataset BuildDataset(const Corpus& corpus, const FeatureContext& ctx,
                     std::size_t workers) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.tables.size(); ++i) {
    index.emplace(corpus.tables[i].id, i);
  }
  // Per table: CF records grouped by field, chart records.
  std::vector<std::map<std::size_t, std::vector<AnalysisRecord>>> cf_gold(
      corpus.tables.size());
  std::vector<std::vector<AnalysisRecord>> chart_gold(corpus.tables.size());
  for (const AnalysisRecord& r : corpus.records) {
    auto it = index.find(r.table_id);
    if (it == index.end() || !RecordIsValid(r, corpus.tables[it->second])) {
      continue;
    }
    if (r.kind == RecordKind::kCF) {
      cf_gold[it->second][r.field_index].push_back(r);
    } else {
      chart_gold[it->second].push_back(r);
    }
  }
  std::vector<std::vector<CFExample>> cf(corpus.tables.size());
  std::vector<std::vector<ChartExample>> chart(corpus.tables.size());
  ParallelFor(corpus.tables.size(), workers, [&](std::size_t t) {
    const Table& table = corpus.tables[t];
    for (auto& [field_index, gold] : cf_gold[t]) {
      CFExample ex;
      ex.table = t;
      ex.field_index = field_index;
      ex.gold = gold;
      ex.features = FeaturizeField(table, field_index, ctx);
      ex.example.labels =
          MakeCFLabels(table.field(field_index), ex.features, ex.gold,
                       ctx.signatures.vocab, &ex.semantics);
      ex.example.input = std::move(ex.features.input);
      cf[t].push_back(std::move(ex));
    }
    if (!chart_gold[t].empty()) {
      ChartExample ex;
      ex.table = t;
      ex.gold = chart_gold[t];
      ex.features = FeaturizeTable(table, ctx);
      ex.example.labels =
          MakeChartLabels(table, ex.features, ex.gold, &ex.semantics);
      ex.example.input = std::move(ex.features.input);
      chart[t].push_back(std::move(ex));
    }
  });
  Dataset out;
  for (std::size_t t = 0; t < corpus.tables.size(); ++t) {
    for (CFExample& e : cf[t]) out.cf.push_back(std::move(e));
    for (ChartExample& e : chart[t]) out.chart.push_back(std::move(e));
  }
  return out;
}

}  // namespace tabsem

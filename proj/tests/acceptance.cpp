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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// when any fails. Arguments select a subset of criteria (default: all).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "corpus_fixtures.hpp"
#include "eval_fixtures.hpp"
#include "gradcheck.hpp"
#include "recommend_oracle.hpp"
#include "signature_oracle.hpp"
#include "tabsem/corpus.hpp"
#include "tabsem/evalkit.hpp"
#include "tabsem/synth.hpp"
#include "tabsem/train.hpp"

namespace tabsem {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string F(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Synthesize, featurize, train and evaluate on the test split.
struct PipelineRun {
  TrainedModel model;
  nlohmann::json report;
  double train_eval_seconds = 0.0;
};

PipelineRun RunPipeline(const Corpus& corpus, bool no_semantics, bool no_statistical) {
  TrainOptions opts;
  opts.config.no_semantics = no_semantics;
  opts.config.no_statistical = no_statistical;
  opts.embedding.dim = opts.config.embed_dim;
  PipelineRun run;
  const auto start = Clock::now();
  TrainedModel shell;
  shell.config = opts.config;
  shell.embedding = opts.embedding;
  const Dataset ds = BuildDataset(corpus, shell.MakeContext(), opts.config.threads);
  const Split split = SplitTables(corpus.tables, opts.config.seed);
  run.model = TrainOnDataset(ds, split, opts);
  run.report = MetricsReport(CollectEval(run.model, corpus, ds, split.test, RecommendOptions{}));
  run.train_eval_seconds = Seconds(start);
  return run;
}

Corpus Seed7Corpus() {
  SynthSpec spec;
  spec.n_tables = 2000;
  spec.seed = 7;
  return GenerateSynthetic(spec);
}

// Shared state across the model-based criteria.
struct Shared {
  bool have_full = false;
  PipelineRun full;
};

Outcome Criterion1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  const Vocabulary vocab = Vocabulary::Default();
  std::size_t bad = 0;
  std::string first;
  for (int t = 0; t < 200; ++t) {
    const Field f = testing::RandomOracleField(rng, 50);
    const std::string why = testing::SignatureMismatch(ComputeCellSignatures(f, vocab),
                                                       testing::OracleCellSignatures(f, vocab));
    if (!why.empty()) {
      if (bad++ == 0) first = "field " + std::to_string(t) + ": " + why;
    }
  }
  const double s = Seconds(start);
  return {bad == 0 && s < 10.0,
          "200 fields, " + std::to_string(bad) + " mismatches" +
              (first.empty() ? "" : " (" + first + ")") + ", " + F(s, 2) + " s"};
}

// A small model trained on a synthetic corpus; its logits score the random
// fields of criterion 2.
TrainedModel SmallTrainedModel() {
  SynthSpec spec;
  spec.n_tables = 300;
  spec.seed = 2;
  TrainOptions opts;
  opts.config.width = 16;
  opts.config.layers = 1;
  opts.config.heads = 2;
  opts.config.embed_dim = 16;
  opts.config.max_epochs = 8;
  opts.embedding.dim = 16;
  return Train(GenerateSynthetic(spec), opts);
}

Outcome Criterion2() {
  const auto start = Clock::now();
  const TrainedModel model = SmallTrainedModel();
  const FeatureContext ctx = model.MakeContext();
  std::mt19937_64 rng(2);
  std::size_t bad = 0, checks = 0, max_sampled = 0;
  std::string first;
  auto check = [&](const std::string& name, const Field& field,
                   const std::vector<CellSignature>& sigs,
                   const std::vector<std::size_t>& sampled, const Logits& logits) {
    max_sampled = std::max(max_sampled, sampled.size());
    for (bool sem : {true, false}) {
      for (std::size_t buckets : {2, 3, 4}) {
        RecommendOptions opts;
        opts.use_semantics = sem;
        opts.bucket_parameters = buckets;
        opts.k = 1 + rng() % 10;
        const CFScoringProblem p =
            BuildCFProblem(field, sigs, sampled, logits, opts, model.signatures.vocab);
        std::string why;
        ++checks;
        if (!testing::SameRanking(RankCF(p, field, opts), testing::OracleRankCF(p, field, opts),
                                  &why)) {
          if (bad++ == 0) first = name + ": " + why;
        }
      }
    }
  };
  for (int i = 0; i < 100; ++i) {
    const testing::RankFixture f = testing::RandomRankFixture(rng, 8);
    const CFFeatures feat = FeaturizeField(f.table, 0, ctx);
    check("trained fixture " + std::to_string(i), f.table.fields[0], feat.cell_sigs,
          feat.sampled, Forward(model.cf, feat.input));
    // Random coarse logits on the same field exercise exact score ties.
    check("random-logit fixture " + std::to_string(i), f.table.fields[0], f.sigs, f.sampled,
          f.logits);
  }
  const double s = Seconds(start);
  return {bad == 0 && max_sampled <= 8 && s < 60.0,
          "100 trained-model fixtures plus 100 random-logit fixtures, " +
              std::to_string(checks) + " rankings, " + std::to_string(bad) + " mismatches" +
              (first.empty() ? "" : " (" + first + ")") + ", max sampled " +
              std::to_string(max_sampled) + ", " + F(s, 2) + " s"};
}

Outcome Criterion3() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string detail;
  for (TaskMode mode : {TaskMode::kCF, TaskMode::kChart}) {
    const testing::GradCheckResult r = testing::GradCheck(mode, 8, 1, 3);
    worst = std::max({worst, r.norm_relative, r.worst_relative});
    detail += std::string(mode == TaskMode::kCF ? "cf" : "chart") + " " +
              std::to_string(r.params) + " params max rel " +
              F(std::max(r.norm_relative, r.worst_relative) * 1e6, 3) + "e-6; ";
  }
  const double s = Seconds(start);
  return {worst < 1e-4 && s < 30.0, detail + F(s, 2) + " s"};
}

Outcome Criterion4(Shared* shared) {
  const Corpus corpus = Seed7Corpus();
  shared->full = RunPipeline(corpus, false, false);
  shared->have_full = true;
  const nlohmann::json& cf = shared->full.report["cf"];
  const double overall = cf["overall"]["R@1"];
  const double op = cf["operation"]["R@1"];
  const double param = cf["parameter"]["R@1"];
  const double sem = cf["semantics"]["R@1"]["overall"];
  const double s = shared->full.train_eval_seconds;
  return {overall >= 0.90 && op >= 0.95 && param >= 0.90 && sem >= 0.95 && s < 600.0,
          "test fields " + cf["fields"].dump() + ": CF R@1 " + F(overall) + ", operation " +
              F(op) + ", parameter " + F(param) + ", semantics " + F(sem) + ", train+eval " +
              F(s, 1) + " s"};
}

Outcome Criterion5(Shared* shared) {
  if (!shared->have_full) Criterion4(shared);
  const Corpus corpus = Seed7Corpus();
  const double full = shared->full.report["cf"]["overall"]["R@1"];
  const double no_sem = RunPipeline(corpus, true, false).report["cf"]["overall"]["R@1"];
  const double no_stat = RunPipeline(corpus, false, true).report["cf"]["overall"]["R@1"];
  const double d_sem = 100.0 * (full - no_sem);
  const double d_stat = 100.0 * (full - no_stat);
  return {d_sem >= 5.0 && d_stat >= 5.0,
          "CF R@1 full " + F(full) + ", no-semantics " + F(no_sem) + " (-" + F(d_sem, 1) +
              " pts), no-statistical " + F(no_stat) + " (-" + F(d_stat, 1) + " pts)"};
}

Outcome Criterion6(Shared* shared) {
  if (!shared->have_full) Criterion4(shared);
  const TrainedModel& model = shared->full.model;
  SynthSpec spec;
  spec.n_tables = 500;
  spec.seed = 8;
  spec.chart_fraction = 1.0;
  const Corpus corpus = GenerateSynthetic(spec);
  std::size_t emitted = 0, violations = 0;
  std::map<std::string, std::size_t> per_type;
  for (const Table& t : corpus.tables) {
    for (const ChartRecommendation& r : RecommendChart(model, t, kNumChartTypes)) {
      ++emitted;
      ++per_type[ChartTypeName(r.chart_type)];
      const std::vector<FieldType> allowed = AllowedXTypes(r.chart_type);
      bool ok;
      if (r.chart_type == ChartType::kPie) {
        ok = r.x_fields.empty();
      } else {
        ok = r.x_fields.size() == 1 &&
             std::find(allowed.begin(), allowed.end(), t.field(r.x_fields[0]).ftype) !=
                 allowed.end();
      }
      violations += !ok;
    }
  }
  const Dataset ds = BuildDataset(corpus, model.MakeContext(), model.config.threads);
  std::vector<std::size_t> all(corpus.tables.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const nlohmann::json report =
      MetricsReport(CollectEval(model, corpus, ds, all, RecommendOptions{}));
  const double r1 = report["chart"]["overall"]["R@1"];
  std::string types;
  for (const auto& [name, n] : per_type) types += " " + name + "=" + std::to_string(n);
  return {violations == 0 && r1 >= 0.90 && report["chart"]["tables"] == 500,
          "500 tables, " + std::to_string(emitted) + " charts emitted (" + types.substr(1) +
              "), " + std::to_string(violations) + " axis violations, chart R@1 " + F(r1)};
}

Outcome Criterion7() {
  std::string log;
  const int bad = testing::CheckFrozenFixtures(&log);
  if (!log.empty() && log.back() == '\n') log.pop_back();
  return {bad == 0, "3 fixtures, " + std::to_string(bad) + " mismatches" +
                        (log.empty() ? "" : " (" + log + ")")};
}

Outcome Criterion8() {
  std::vector<Table> group = testing::SchemaGroupFixture();
  group.resize(7);
  const std::size_t kept = DedupAndSample(group, 5, 7).size();
  std::mt19937_64 rng(8);
  std::size_t not_idempotent = 0, records = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<AnalysisRecord> set = testing::RandomRecordSet(rng);
    records += set.size();
    const std::vector<AnalysisRecord> once = MergeRecords(set);
    not_idempotent += testing::Dump(MergeRecords(once)) != testing::Dump(once);
  }
  return {kept == 5 && not_idempotent == 0,
          "dedup kept " + std::to_string(kept) + " of 7; merge not idempotent on " +
              std::to_string(not_idempotent) + " of 1000 sets (" + std::to_string(records) +
              " records)"};
}

Outcome Criterion9(Shared* shared) {
  if (!shared->have_full) Criterion4(shared);
  const PipelineRun again = RunPipeline(Seed7Corpus(), false, false);
  const std::string a = shared->full.report.dump(2);
  const std::string b = again.report.dump(2);
  const bool same_model = again.model.cf.Checksum() == shared->full.model.cf.Checksum() &&
                          again.model.chart.Checksum() == shared->full.model.chart.Checksum();
  return {a == b && same_model,
          std::string("metrics JSON ") + (a == b ? "identical" : "differs") + " (" +
              std::to_string(a.size()) + " bytes), model checksums " +
              (same_model ? "identical" : "differ")};
}

}  // namespace
}  // namespace tabsem

int main(int argc, char** argv) {
  using tabsem::Outcome;
  tabsem::Shared shared;
  const std::vector<std::function<Outcome()>> criteria = {
      tabsem::Criterion1,
      tabsem::Criterion2,
      tabsem::Criterion3,
      [&] { return tabsem::Criterion4(&shared); },
      [&] { return tabsem::Criterion5(&shared); },
      [&] { return tabsem::Criterion6(&shared); },
      tabsem::Criterion7,
      tabsem::Criterion8,
      [&] { return tabsem::Criterion9(&shared); },
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s - %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

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

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabsem/corpus.hpp"
#include "tabsem/csv.hpp"
#include "tabsem/error.hpp"
#include "tabsem/evalkit.hpp"
#include "tabsem/featurize.hpp"
#include "tabsem/recommend.hpp"
#include "tabsem/synth.hpp"
#include "tabsem/train.hpp"

namespace {

using nlohmann::json;
using namespace tabsem;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Ablations {
  bool no_semantics = false;
  bool no_statistical = false;
  bool no_linguistic = false;

  void Add(CLI::App* app) {
    app->add_flag("--no-semantics", no_semantics,
                  "drop the intent/focus heads and all candidate pruning");
    app->add_flag("--no-statistical", no_statistical,
                  "zero every signature vector");
    app->add_flag("--no-linguistic", no_linguistic, "zero every embedding");
  }
  void Apply(ModelConfig* c) const {
    c->no_semantics = c->no_semantics || no_semantics;
    c->no_statistical = c->no_statistical || no_statistical;
    c->no_linguistic = c->no_linguistic || no_linguistic;
  }
};

std::string DumpLines(const std::vector<json>& lines) {
  std::string out;
  for (const json& j : lines) {
    out += j.dump();
    out += '\n';
  }
  return out;
}

void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    WriteTextFile(path, text);
  }
}

FeatureContext ContextFor(const Ablations& ab, std::size_t sample_cap,
                          const std::string& signatures_path) {
  FeatureContext ctx;
  ctx.provider = EmbeddingSpec{}.Make();
  if (!signatures_path.empty()) {
    ctx.signatures = SignatureConfig::FromFile(signatures_path);
  }
  ctx.sample_cap = sample_cap;
  ctx.zero_statistical = ab.no_statistical;
  ctx.zero_linguistic = ab.no_linguistic;
  return ctx;
}

Table LoadCsvTable(const std::string& path) {
  return ParseTable(ReadCsvFile(path), true, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabsem: table analysis recommendation (conditional "
               "formatting rules and charts)"};
  app.require_subcommand(1);
  std::size_t workers = 1;
  app.add_option("--workers", workers, "featurization threads")
      ->check(CLI::Range(1, 256));

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  SynthSpec spec;
  std::string synth_spec_path, synth_out;
  synth->add_option("--spec", synth_spec_path,
                    "JSON {n_tables, rows_range, seed, pattern_mix, "
                    "chart_fraction, max_cf_fields}");
  auto* n_opt = synth->add_option("--n", spec.n_tables, "number of tables");
  auto* seed_opt_s = synth->add_option("--seed", spec.seed, "RNG seed");
  synth->add_option("--out,-o", synth_out, "corpus path (.gz compresses)")
      ->required();

  // prep
  auto* prep = app.add_subcommand("prep", "clean, merge, filter and dedup");
  PrepOptions prep_opts;
  std::string prep_in, prep_out;
  prep->add_option("--in,-i", prep_in, "raw corpus")->required();
  prep->add_option("--out,-o", prep_out, "prepared corpus")->required();
  prep->add_option("--coverage", prep_opts.coverage_threshold,
                   "minimum record coverage");
  prep->add_option("--max-per-schema", prep_opts.max_per_schema,
                   "tables kept per schema");
  prep->add_option("--seed", prep_opts.seed, "sampling seed");

  // featurize
  auto* feat = app.add_subcommand(
      "featurize", "write per-field signature features as JSONL");
  std::string feat_in, feat_out, feat_sig;
  std::size_t feat_cap = kDefaultSampleCap;
  Ablations feat_ab;
  feat->add_option("--in,-i", feat_in, "corpus")->required();
  feat->add_option("--out,-o", feat_out, "output JSONL (default stdout)");
  feat->add_option("--signatures", feat_sig, "signature config JSON");
  feat->add_option("--sample-cap", feat_cap, "sampled cells per field");
  feat_ab.Add(feat);

  // label
  auto* label = app.add_subcommand(
      "label", "write analytical-semantics labels as JSONL");
  std::string label_in, label_out, label_sig;
  label->add_option("--in,-i", label_in, "corpus")->required();
  label->add_option("--out,-o", label_out, "output JSONL (default stdout)");
  label->add_option("--signatures", label_sig, "signature config JSON");

  // train
  auto* train = app.add_subcommand("train", "train the CF and chart models");
  std::string train_in, train_model, train_config, train_sig;
  std::uint64_t train_seed = 0;
  bool paper_scale = false;
  Ablations train_ab;
  train->add_option("--in,-i", train_in, "corpus")->required();
  train->add_option("--model,-m", train_model, "output model JSON")
      ->required();
  train->add_option("--config", train_config,
                    "model config JSON (width, layers, heads, ffn_mult, "
                    "embed_dim, lr, batch, max_epochs, patience, seed, "
                    "threads, loss weights)");
  train->add_option("--signatures", train_sig, "signature config JSON");
  auto* seed_opt_t = train->add_option("--seed", train_seed, "split/init seed");
  train->add_flag("--paper-scale", paper_scale,
                  "256-wide, 6-layer, 8-head encoder instead of the desk preset");
  train_ab.Add(train);

  // eval
  auto* eval = app.add_subcommand("eval", "score a model on the test split");
  std::string eval_in, eval_model, eval_out, eval_text;
  std::string eval_split = "test";
  std::size_t eval_k = 3;
  Ablations eval_ab;
  eval->add_option("--in,-i", eval_in, "corpus")->required();
  eval->add_option("--model,-m", eval_model, "model JSON")->required();
  eval->add_option("--out,-o", eval_out, "metrics JSON (default stdout)");
  eval->add_option("--report", eval_text, "also write the text table here");
  eval->add_option("--split", eval_split, "test | val | train | all")
      ->check(CLI::IsMember({"test", "val", "train", "all"}));
  eval->add_option("--k", eval_k, "recommendations per field")
      ->check(CLI::Range(1, 100));
  eval_ab.Add(eval);

  // recommend
  auto* rec = app.add_subcommand("recommend", "recommend for one CSV table");
  std::string rec_model, rec_table;
  std::size_t rec_field = 0, rec_k = 3;
  bool rec_chart = false, rec_explain = false, rec_json = false;
  Ablations rec_ab;
  rec->add_option("--model,-m", rec_model, "model JSON")->required();
  rec->add_option("--table,-t", rec_table, "CSV with a header row")
      ->required();
  auto* field_opt = rec->add_option("--field,-f", rec_field,
                                    "0-based field index (CF)");
  rec->add_option("--k", rec_k, "number of recommendations")
      ->check(CLI::Range(1, 100));
  rec->add_flag("--chart", rec_chart, "recommend charts instead of CF rules");
  rec->add_flag("--explain", rec_explain, "add natural-language explanations");
  rec->add_flag("--json", rec_json, "print JSON lines");
  rec_ab.Add(rec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  auto log = [](const std::string& line) { std::cerr << line << '\n'; };

  try {
    if (synth->parsed()) {
      SynthSpec effective;
      if (!synth_spec_path.empty()) {
        effective = SynthSpec::FromJson(json::parse(ReadFileMaybeGzip(synth_spec_path)));
      }
      if (n_opt->count()) effective.n_tables = spec.n_tables;
      if (seed_opt_s->count()) effective.seed = spec.seed;
      const Corpus corpus = GenerateSynthetic(effective);
      WriteCorpus(synth_out, corpus);
      log("wrote " + std::to_string(corpus.tables.size()) + " tables, " +
          std::to_string(corpus.records.size()) + " records to " + synth_out);
    } else if (prep->parsed()) {
      PrepStats stats;
      Corpus out = PrepareCorpus(ReadCorpus(prep_in), prep_opts, &stats);
      out.header["prep"] = {{"coverage", prep_opts.coverage_threshold},
                            {"max_per_schema", prep_opts.max_per_schema},
                            {"seed", prep_opts.seed}};
      WriteCorpus(prep_out, out);
      log("kept " + std::to_string(out.tables.size()) + " tables, " +
          std::to_string(out.records.size()) + " records; invalid " +
          std::to_string(stats.invalid_records) + ", merged " +
          std::to_string(stats.merged_records) + ", low coverage " +
          std::to_string(stats.low_coverage_records) + ", dropped tables " +
          std::to_string(stats.dropped_tables));
    } else if (feat->parsed()) {
      const Corpus corpus = ReadCorpus(feat_in);
      const FeatureContext ctx = ContextFor(feat_ab, feat_cap, feat_sig);
      std::vector<json> lines(1);
      lines[0] = {{"doc", "header"},
                  {"sample_cap", feat_cap},
                  {"no_statistical", feat_ab.no_statistical},
                  {"no_linguistic", feat_ab.no_linguistic}};
      std::vector<std::vector<json>> per_table(corpus.tables.size());
      ParallelFor(corpus.tables.size(), workers, [&](std::size_t t) {
        const Table& table = corpus.tables[t];
        for (const Field& f : table.fields) {
          const CFFeatures cf = FeaturizeField(table, f.index, ctx);
          json cells = json::array();
          for (std::size_t i : cf.sampled) {
            const auto v = CellSignatureVector(cf.cell_sigs[i]);
            cells.push_back(ctx.zero_statistical
                                ? json(std::vector<double>(v.size(), 0.0))
                                : json(v));
          }
          const auto fv = FieldSignatureVector(cf.field_sig);
          per_table[t].push_back(
              {{"table", table.id},
               {"field", f.index},
               {"type", FieldTypeName(f.ftype)},
               {"field_signature",
                ctx.zero_statistical ? json(std::vector<double>(fv.size(), 0.0))
                                     : json(fv)},
               {"sampled", cf.sampled},
               {"cell_signatures", std::move(cells)}});
        }
      });
      for (auto& v : per_table) {
        for (auto& j : v) lines.push_back(std::move(j));
      }
      Emit(feat_out, DumpLines(lines));
    } else if (label->parsed()) {
      const Corpus corpus = ReadCorpus(label_in);
      const Dataset ds =
          BuildDataset(corpus, ContextFor({}, kDefaultSampleCap, label_sig),
                       workers);
      std::vector<json> lines;
      for (const CFExample& ex : ds.cf) {
        json focuses = json::array();
        for (DataFocusCF d : ex.semantics.focuses) focuses.push_back(FocusName(d));
        lines.push_back({{"task", "cf"},
                         {"table", corpus.tables[ex.table].id},
                         {"field", ex.field_index},
                         {"intent", IntentName(ex.semantics.intent)},
                         {"focuses", std::move(focuses)}});
      }
      for (const ChartExample& ex : ds.chart) {
        json intents = json::array(), focuses = json::array();
        for (UserIntentChart u : ex.semantics.intents) intents.push_back(IntentName(u));
        for (DataFocusChart d : ex.semantics.focuses) focuses.push_back(FocusName(d));
        lines.push_back({{"task", "chart"},
                         {"table", corpus.tables[ex.table].id},
                         {"intents", std::move(intents)},
                         {"focuses", std::move(focuses)}});
      }
      Emit(label_out, DumpLines(lines));
    } else if (train->parsed()) {
      TrainOptions opts;
      if (paper_scale) opts.config = ModelConfig::PaperScale();
      if (!train_config.empty()) {
        opts.config = ModelConfigFromJson(
            json::parse(ReadFileMaybeGzip(train_config)), opts.config);
      }
      if (seed_opt_t->count()) opts.config.seed = train_seed;
      train_ab.Apply(&opts.config);
      opts.config.threads = std::max<std::size_t>(opts.config.threads, 1);
      opts.embedding.dim = opts.config.embed_dim;
      if (!train_sig.empty()) opts.signatures = SignatureConfig::FromFile(train_sig);
      opts.config.Validate();
      log("config " + ModelConfigToJson(opts.config).dump());
      const Corpus corpus = ReadCorpus(train_in);
      TrainedModel shell;
      shell.config = opts.config;
      shell.embedding = opts.embedding;
      shell.signatures = opts.signatures;
      shell.sample_cap = opts.sample_cap;
      const Dataset ds = BuildDataset(corpus, shell.MakeContext(), workers);
      const Split split = SplitTables(corpus.tables, opts.config.seed);
      log("split train/val/test = " + std::to_string(split.train.size()) + "/" +
          std::to_string(split.val.size()) + "/" +
          std::to_string(split.test.size()) + " tables");
      const TrainedModel model = TrainOnDataset(ds, split, opts, log);
      model.Save(train_model);
      log("saved " + train_model);
    } else if (eval->parsed()) {
      TrainedModel model = TrainedModel::Load(eval_model);
      eval_ab.Apply(&model.config);
      const Corpus corpus = ReadCorpus(eval_in);
      const Dataset ds = BuildDataset(corpus, model.MakeContext(), workers);
      const Split split = SplitTables(corpus.tables, model.config.seed);
      std::vector<std::size_t> tables;
      if (eval_split == "test") tables = split.test;
      if (eval_split == "val") tables = split.val;
      if (eval_split == "train") tables = split.train;
      if (eval_split == "all") {
        for (std::size_t i = 0; i < corpus.tables.size(); ++i) tables.push_back(i);
      }
      RecommendOptions ropts;
      ropts.k = eval_k;
      json report = MetricsReport(CollectEval(model, corpus, ds, tables, ropts));
      report["config"] = ModelConfigToJson(model.config);
      report["seed"] = model.config.seed;
      report["evaluated_split"] = eval_split;
      report["split"] = {{"train", split.train.size()},
                         {"val", split.val.size()},
                         {"test", split.test.size()}};
      Emit(eval_out, report.dump(2) + "\n");
      const std::string text = FormatReport(report);
      if (!eval_text.empty()) WriteTextFile(eval_text, text);
      if (!eval_out.empty() && eval_out != "-") std::cerr << text;
    } else if (rec->parsed()) {
      TrainedModel model = TrainedModel::Load(rec_model);
      rec_ab.Apply(&model.config);
      const Table table = LoadCsvTable(rec_table);
      if (rec_chart) {
        for (ChartRecommendation& r : RecommendChart(model, table, rec_k)) {
          if (rec_explain) r.explanation = Explain(r, table);
          if (rec_json) {
            std::cout << ToJson(r, rec_explain).dump() << '\n';
            continue;
          }
          std::string x, y;
          for (std::size_t i : r.x_fields) x += (x.empty() ? "" : ",") + table.fields[i].header;
          for (std::size_t i : r.y_fields) y += (y.empty() ? "" : ",") + table.fields[i].header;
          std::printf("%-8s x=[%s] y=[%s] score=%.4f\n", ChartTypeName(r.chart_type),
                      x.c_str(), y.c_str(), r.score);
          if (rec_explain) std::printf("    %s\n", r.explanation.c_str());
        }
      } else {
        if (!field_opt->count()) throw UsageError("--field is required without --chart");
        RecommendOptions ropts;
        ropts.k = rec_k;
        for (CFRecommendation& r : RecommendCF(model, table, rec_field, ropts)) {
          if (rec_explain) r.explanation = Explain(r, table.fields[rec_field]);
          if (rec_json) {
            std::cout << ToJson(r, rec_explain).dump() << '\n';
            continue;
          }
          std::string params;
          for (const ParamValue& p : r.parameters) {
            params += (params.empty() ? "" : ", ") + p.ToString();
          }
          std::printf("%-16s [%s] score=%.4f\n", OperationName(r.operation),
                      params.c_str(), r.score);
          if (rec_explain) std::printf("    %s\n", r.explanation.c_str());
        }
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}

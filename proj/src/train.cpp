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

#include "tabsem/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rng.hpp"
#include "tabsem/error.hpp"

namespace tabsem {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

class Adam {
 public:
  Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  void Step(std::vector<double>* params, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < grad.size(); ++i) {
      m_[i] = kAdamBeta1 * m_[i] + (1.0 - kAdamBeta1) * grad[i];
      v_[i] = kAdamBeta2 * v_[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      (*params)[i] -= lr_ * mhat / (std::sqrt(vhat) + kAdamEps);
    }
  }

 private:
  double lr_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

void CountColumn(const Vector& labels, Vector* pos, Vector* total) {
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    (*pos)(i) += labels(i);
    (*total)(i) += 1.0;
  }
}

Vector Ratio(const Vector& pos, const Vector& total) {
  Vector out(pos.size());
  for (Eigen::Index i = 0; i < pos.size(); ++i) {
    const double neg = total(i) - pos(i);
    out(i) = (pos(i) > 0.0 && neg > 0.0) ? neg / pos(i) : 1.0;
  }
  return out;
}

LossWeights EffectiveWeights(const ModelConfig& config) {
  LossWeights w = config.loss_weights;
  if (config.no_semantics) {
    w.alpha = 0.0;
    w.beta = 0.0;
  }
  return w;
}

nlohmann::json HistoryToJson(const TrainHistory& h) {
  return {{"val_loss", h.val_loss},
          {"best_epoch", h.best_epoch},
          {"train_examples", h.train_examples},
          {"val_examples", h.val_examples}};
}

TrainHistory HistoryFromJson(const nlohmann::json& j) {
  TrainHistory h;
  h.val_loss = j.value("val_loss", std::vector<double>{});
  h.best_epoch = j.value("best_epoch", std::size_t{0});
  h.train_examples = j.value("train_examples", std::size_t{0});
  h.val_examples = j.value("val_examples", std::size_t{0});
  return h;
}

}  // namespace

Split SplitTables(const std::vector<Table>& tables, std::uint64_t seed) {
  std::vector<std::size_t> order(tables.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tables[a].id < tables[b].id;
  });
  internal::Rng rng(seed);
  rng.Shuffle(&order);
  const double n = static_cast<double>(tables.size());
  const std::size_t n_train = static_cast<std::size_t>(std::llround(0.7 * n));
  const std::size_t n_val = std::min(
      tables.size() - n_train, static_cast<std::size_t>(std::llround(0.1 * n)));
  Split s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

PosWeights ComputePosWeights(std::span<const TrainingExample* const> examples,
                             const ModelDims& dims) {
  const auto sz = [](std::size_t n) { return static_cast<Eigen::Index>(n); };
  Vector pu = Vector::Zero(sz(dims.n_intent)), tu = pu;
  Vector pd = Vector::Zero(sz(dims.n_focus)), td = pd;
  Vector po = Vector::Zero(sz(dims.n_op)), to = po;
  Vector pr = Vector::Zero(sz(dims.ref_width)), tr = pr;
  for (const TrainingExample* ex : examples) {
    CountColumn(ex->labels.intent, &pu, &tu);
    CountColumn(ex->labels.focus, &pd, &td);
    CountColumn(ex->labels.op, &po, &to);
    for (Eigen::Index r = 0; r < ex->labels.ref.rows(); ++r) {
      CountColumn(ex->labels.ref.row(r).transpose(), &pr, &tr);
    }
  }
  PosWeights w;
  w.intent = Ratio(pu, tu);
  w.focus = Ratio(pd, td);
  w.op = Ratio(po, to);
  w.ref = Ratio(pr, tr);
  return w;
}

std::shared_ptr<const EmbeddingProvider> EmbeddingSpec::Make() const {
  if (kind == "hashed") {
    return std::make_shared<HashedNGramEmbedder>(dim, std::vector<std::size_t>{2, 3},
                                                 seed);
  }
  if (kind == "precomputed") {
    auto p = std::make_shared<PrecomputedEmbeddings>(
        PrecomputedEmbeddings::FromJsonl(path));
    if (p->dimension() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "precomputed embeddings have dimension " +
                      std::to_string(p->dimension()));
    }
    return p;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown embedding kind: " + kind);
}

nlohmann::json EmbeddingSpec::ToJson() const {
  nlohmann::json j = {{"kind", kind}, {"dim", dim}, {"seed", seed}};
  if (kind == "precomputed") j["path"] = path;
  return j;
}

EmbeddingSpec EmbeddingSpec::FromJson(const nlohmann::json& j) {
  EmbeddingSpec s;
  s.kind = j.value("kind", s.kind);
  s.dim = j.value("dim", s.dim);
  s.seed = j.value("seed", s.seed);
  s.path = j.value("path", s.path);
  return s;
}

nlohmann::json ModelConfigToJson(const ModelConfig& c) {
  return {{"width", c.width},
          {"layers", c.layers},
          {"heads", c.heads},
          {"ffn_mult", c.ffn_mult},
          {"embed_dim", c.embed_dim},
          {"loss_weights",
           {{"alpha", c.loss_weights.alpha},
            {"beta", c.loss_weights.beta},
            {"gamma", c.loss_weights.gamma},
            {"delta", c.loss_weights.delta}}},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"no_semantics", c.no_semantics},
          {"no_statistical", c.no_statistical},
          {"no_linguistic", c.no_linguistic}};
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j, ModelConfig c) {
  try {
    c.width = j.value("width", c.width);
    c.layers = j.value("layers", c.layers);
    c.heads = j.value("heads", c.heads);
    c.ffn_mult = j.value("ffn_mult", c.ffn_mult);
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    if (j.contains("loss_weights")) {
      const nlohmann::json& w = j.at("loss_weights");
      c.loss_weights.alpha = w.value("alpha", c.loss_weights.alpha);
      c.loss_weights.beta = w.value("beta", c.loss_weights.beta);
      c.loss_weights.gamma = w.value("gamma", c.loss_weights.gamma);
      c.loss_weights.delta = w.value("delta", c.loss_weights.delta);
    }
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.no_semantics = j.value("no_semantics", c.no_semantics);
    c.no_statistical = j.value("no_statistical", c.no_statistical);
    c.no_linguistic = j.value("no_linguistic", c.no_linguistic);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("bad config: ") + e.what());
  }
  const LossWeights& w = c.loss_weights;
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0 || w.delta < 0) {
    throw Error(ErrorCode::kInvalidSpec, "loss weights must be >= 0");
  }
  c.Validate();
  return c;
}

ModelParameters TrainTask(TaskMode mode,
                          std::span<const TrainingExample* const> train,
                          std::span<const TrainingExample* const> val,
                          const ModelConfig& config, PosWeights* pos_weights,
                          TrainHistory* history, const LogFn& log) {
  const ModelDims dims = ModelDims::For(mode, config);
  const std::uint64_t stream = mode == TaskMode::kCF ? 0 : 1;
  ModelParameters params(dims, config.seed * 2 + stream);
  const PosWeights pw = ComputePosWeights(train, dims);
  const LossWeights weights = EffectiveWeights(config);
  std::span<const TrainingExample* const> monitor = val.empty() ? train : val;

  TrainHistory h;
  h.train_examples = train.size();
  h.val_examples = val.size();
  double best = BatchLoss(params, monitor, weights, pw).total;
  h.val_loss.push_back(best);
  ModelParameters best_params = params;
  std::size_t bad_epochs = 0;

  std::vector<const TrainingExample*> order(train.begin(), train.end());
  internal::Rng rng(config.seed * 2 + stream + 101);
  Adam adam(params.buffer().values.size(), config.learning_rate);
  ParamBuffer grad = params.ZerosLike();
  const char* name = mode == TaskMode::kCF ? "cf" : "chart";

  for (std::size_t epoch = 1; epoch <= config.max_epochs && !order.empty();
       ++epoch) {
    rng.Shuffle(&order);
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      BatchLossAndGradient(
          params, std::span<const TrainingExample* const>(order.data() + b, e - b),
          weights, pw, &grad, config.threads);
      adam.Step(&params.buffer().values, grad.values);
    }
    const double loss = BatchLoss(params, monitor, weights, pw).total;
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kShapeMismatch, "training diverged");
    }
    h.val_loss.push_back(loss);
    if (log) {
      log(std::string(name) + " epoch " + std::to_string(epoch) +
          " val_loss " + std::to_string(loss));
    }
    if (loss < best) {
      best = loss;
      best_params = params;
      h.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      break;
    }
  }
  if (pos_weights != nullptr) *pos_weights = pw;
  if (history != nullptr) *history = std::move(h);
  return best_params;
}

FeatureContext TrainedModel::MakeContext() const {
  FeatureContext ctx;
  ctx.provider = embedding.Make();
  ctx.signatures = signatures;
  ctx.sample_cap = sample_cap;
  ctx.zero_statistical = config.no_statistical;
  ctx.zero_linguistic = config.no_linguistic;
  return ctx;
}

nlohmann::json TrainedModel::ToJson() const {
  nlohmann::json j;
  j["format"] = "tabsem-model/1";
  j["config"] = ModelConfigToJson(config);
  j["embedding"] = embedding.ToJson();
  j["signatures"] = nlohmann::json::parse(signatures.ToJsonText());
  j["sample_cap"] = sample_cap;
  if (has_cf) {
    j["cf"] = cf.ToJson();
    j["cf_history"] = HistoryToJson(cf_history);
  }
  if (has_chart) {
    j["chart"] = chart.ToJson();
    j["chart_history"] = HistoryToJson(chart_history);
  }
  return j;
}

TrainedModel TrainedModel::FromJson(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "tabsem-model/1") {
      throw Error(ErrorCode::kParse, "not a model file");
    }
    TrainedModel m;
    m.config = ModelConfigFromJson(j.at("config"), ModelConfig{});
    m.embedding = EmbeddingSpec::FromJson(j.at("embedding"));
    m.signatures = SignatureConfig::FromJsonText(j.at("signatures").dump());
    m.sample_cap = j.value("sample_cap", kDefaultSampleCap);
    if (j.contains("cf")) {
      m.cf = ModelParameters::FromJson(j.at("cf"));
      m.cf_history = HistoryFromJson(j.value("cf_history", nlohmann::json::object()));
      m.has_cf = true;
    }
    if (j.contains("chart")) {
      m.chart = ModelParameters::FromJson(j.at("chart"));
      m.chart_history =
          HistoryFromJson(j.value("chart_history", nlohmann::json::object()));
      m.has_chart = true;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad model file: ") + e.what());
  }
}

void TrainedModel::Save(const std::string& path) const {
  WriteTextFile(path, ToJson().dump());
}

TrainedModel TrainedModel::Load(const std::string& path) {
  const std::string text = ReadFileMaybeGzip(path);
  try {
    return FromJson(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("bad model file: ") + e.what());
  }
}

TrainedModel TrainOnDataset(const Dataset& dataset, const Split& split,
                            const TrainOptions& options, const LogFn& log) {
  if (dataset.cf.size() + dataset.chart.size() < kMinLabeledExamples) {
    throw Error(ErrorCode::kCorpusTooSmall,
                "need at least " + std::to_string(kMinLabeledExamples) +
                    " labeled examples");
  }
  if (options.embedding.dim != options.config.embed_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding dimension differs from the model's");
  }
  const std::set<std::size_t> train_set(split.train.begin(), split.train.end());
  const std::set<std::size_t> val_set(split.val.begin(), split.val.end());

  TrainedModel m;
  m.config = options.config;
  m.embedding = options.embedding;
  m.signatures = options.signatures;
  m.sample_cap = options.sample_cap;

  auto gather = [&](const auto& examples, const std::set<std::size_t>& tables) {
    std::vector<const TrainingExample*> out;
    for (const auto& ex : examples) {
      if (tables.count(ex.table) != 0) out.push_back(&ex.example);
    }
    return out;
  };
  const auto cf_train = gather(dataset.cf, train_set);
  const auto cf_val = gather(dataset.cf, val_set);
  if (!cf_train.empty()) {
    m.cf = TrainTask(TaskMode::kCF, cf_train, cf_val, options.config, nullptr,
                     &m.cf_history, log);
    m.has_cf = true;
  }
  const auto chart_train = gather(dataset.chart, train_set);
  const auto chart_val = gather(dataset.chart, val_set);
  if (!chart_train.empty()) {
    m.chart = TrainTask(TaskMode::kChart, chart_train, chart_val,
                        options.config, nullptr, &m.chart_history, log);
    m.has_chart = true;
  }
  return m;
}

TrainedModel Train(const Corpus& corpus, const TrainOptions& options,
                   const LogFn& log) {
  TrainedModel shell;
  shell.config = options.config;
  shell.embedding = options.embedding;
  shell.signatures = options.signatures;
  shell.sample_cap = options.sample_cap;
  const Dataset dataset =
      BuildDataset(corpus, shell.MakeContext(), options.config.threads);
  return TrainOnDataset(dataset, SplitTables(corpus.tables, options.config.seed),
                        options, log);
}

}  // namespace tabsem

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

#ifndef TABSEM_TRAIN_HPP_
#define TABSEM_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabsem/corpus.hpp"
#include "tabsem/featurize.hpp"
#include "tabsem/model.hpp"

namespace tabsem {

// Table indices of each split.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Shuffles table ids with `seed` and cuts 70/10/20 (rounded to nearest for
// train and validation, the rest to test).
Split SplitTables(const std::vector<Table>& tables, std::uint64_t seed);

// p_c = #neg / #pos per class over `examples` (1 when a class has no
// positives or no negatives).
PosWeights ComputePosWeights(std::span<const TrainingExample* const> examples,
                             const ModelDims& dims);

// Which text embedding provider a model was trained with.
struct EmbeddingSpec {
  std::string kind = "hashed";  // "hashed" or "precomputed"
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::string path;  // precomputed only

  std::shared_ptr<const EmbeddingProvider> Make() const;
  nlohmann::json ToJson() const;
  static EmbeddingSpec FromJson(const nlohmann::json& j);
};

nlohmann::json ModelConfigToJson(const ModelConfig& c);
// Missing keys keep the values already in `base`.
ModelConfig ModelConfigFromJson(const nlohmann::json& j, ModelConfig base);

struct TrainHistory {
  std::vector<double> val_loss;  // index 0 is before the first update
  std::size_t best_epoch = 0;
  std::size_t train_examples = 0;
  std::size_t val_examples = 0;
};

using LogFn = std::function<void(const std::string&)>;

// Mini-batch Adam with early stopping on validation J_final; returns the
// best-validation parameters. With no validation examples the training
// loss is monitored instead.
ModelParameters TrainTask(TaskMode mode,
                          std::span<const TrainingExample* const> train,
                          std::span<const TrainingExample* const> val,
                          const ModelConfig& config, PosWeights* pos_weights,
                          TrainHistory* history, const LogFn& log = {});

// Everything needed to featurize and score new tables.
struct TrainedModel {
  ModelConfig config;
  EmbeddingSpec embedding;
  SignatureConfig signatures;
  std::size_t sample_cap = kDefaultSampleCap;
  bool has_cf = false;
  bool has_chart = false;
  ModelParameters cf;
  ModelParameters chart;
  TrainHistory cf_history;
  TrainHistory chart_history;

  FeatureContext MakeContext() const;
  nlohmann::json ToJson() const;
  static TrainedModel FromJson(const nlohmann::json& j);
  void Save(const std::string& path) const;
  static TrainedModel Load(const std::string& path);
};

inline constexpr std::size_t kMinLabeledExamples = 10;

struct TrainOptions {
  ModelConfig config;
  EmbeddingSpec embedding;
  SignatureConfig signatures;
  std::size_t sample_cap = kDefaultSampleCap;
};

// Featurizes the corpus, splits by table id and trains both task models.
// Throws CorpusTooSmall with fewer than kMinLabeledExamples examples.
TrainedModel Train(const Corpus& corpus, const TrainOptions& options,
                   const LogFn& log = {});

// Same, reusing a dataset built with options' feature context and a split.
TrainedModel TrainOnDataset(const Dataset& dataset, const Split& split,
                            const TrainOptions& options,
                            const LogFn& log = {});

}  // namespace tabsem

#endif  // TABSEM_TRAIN_HPP_

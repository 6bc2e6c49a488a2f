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

#ifndef TABSEM_MODEL_HPP_
#define TABSEM_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tabsem/embeddings.hpp"
#include "json.hpp"
#include "tabsem/error.hpp"

namespace tabsem {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                          Eigen::RowMajor>;

enum class TaskMode : std::uint8_t { kCF, kChart };

enum class TokenType : int { kTable = 0, kField = 1, kCell = 2 };

struct LossWeights {
  double alpha = 1.0;  // intent
  double beta = 1.0;   // focus
  double gamma = 1.0;  // operation / chart type
  double delta = 1.0;  // reference (cells or axes)
};

struct ModelConfig {
  std::size_t width = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t ffn_mult = 4;
  std::size_t embed_dim = 64;
  LossWeights loss_weights;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 40;
  std::size_t patience = 6;
  std::uint64_t seed = 7;
  std::size_t threads = 4;
  // Ablations.
  bool no_semantics = false;
  bool no_statistical = false;
  bool no_linguistic = false;

  static ModelConfig PaperScale();
  void Validate() const;
};

// Shapes of one model instance.
struct ModelDims {
  TaskMode mode = TaskMode::kCF;
  std::size_t width = 0;
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t ffn = 0;
  std::size_t embed_dim = 0;
  std::size_t field_features = 0;  // embed_dim + field signature width
  std::size_t cell_features = 0;   // embed_dim + cell signature width
  std::size_t n_intent = 0;
  std::size_t n_focus = 0;
  std::size_t n_op = 0;
  std::size_t ref_width = 0;  // 1 for cells, 2 (is_x, is_y) for chart fields

  static ModelDims For(TaskMode mode, const ModelConfig& config);
  bool operator==(const ModelDims&) const = default;
};

// A rows x cols block inside the flat parameter buffer.
struct Slot {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

struct LayerSlots {
  Slot ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;
  Slot ln2_g, ln2_b, w1, b1, w2, b2;
};

struct ModelLayout {
  Slot field_w, field_b, cell_w, cell_b, token_type;
  std::vector<LayerSlots> layers;
  Slot lnf_g, lnf_b;
  Slot intent_w, intent_b, focus_w, focus_b, op_w, op_b, ref_w, ref_b;
  std::size_t total = 0;

  static ModelLayout For(const ModelDims& dims);
  // Named groups in buffer order.
  std::vector<std::pair<std::string, Slot>> Named() const;
};

// Flat parameter (or gradient) buffer with typed views.
struct ParamBuffer {
  std::vector<double> values;

  Eigen::Map<Mat> M(const Slot& s) {
    return {values.data() + s.offset, static_cast<Eigen::Index>(s.rows),
            static_cast<Eigen::Index>(s.cols)};
  }
  Eigen::Map<const Mat> M(const Slot& s) const {
    return {values.data() + s.offset, static_cast<Eigen::Index>(s.rows),
            static_cast<Eigen::Index>(s.cols)};
  }
};

class ModelParameters {
 public:
  ModelParameters() = default;
  ModelParameters(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  const ModelLayout& layout() const { return layout_; }
  ParamBuffer& buffer() { return buffer_; }
  const ParamBuffer& buffer() const { return buffer_; }

  ParamBuffer ZerosLike() const;
  // FNV-1a over the raw bytes of every parameter.
  std::uint64_t Checksum() const;
  bool AllFinite() const;

  nlohmann::json ToJson() const;
  static ModelParameters FromJson(const nlohmann::json& j);

 private:
  ModelDims dims_;
  ModelLayout layout_;
  ParamBuffer buffer_;
};

// Fused sequence and token types, ready for the encoder.
struct FusedSequence {
  Mat tokens;
  std::vector<TokenType> types;
};

// Raw per-position inputs: concat(embedding, signature vector).
struct ModelInput {
  Mat field_rows;  // CF: 1 row; chart: one row per table field
  Mat cell_rows;   // CF: one row per sampled cell; chart: empty
};

// Concatenates embeddings with signature vectors. Throws DimensionMismatch.
ModelInput MakeCFInput(const Vector& field_embed,
                       std::span<const double> field_sig,
                       std::span<const Vector> cell_embeds,
                       std::span<const std::vector<double>> cell_sigs);

// field: linear(relu(concat(FLR, S))); cells: linear(relu(concat(CLR, s))).
// CF: [field] ++ cells with types [field, cell, ...]. Chart: [table] ++
// fields, where the table token is the mean of the fused field tokens.
FusedSequence FuseInputs(const ModelParameters& params,
                         const ModelInput& input);

// Pre-norm transformer encoder without positional encodings. Token-type
// embeddings are added to the input. Positions with mask == false are
// excluded as attention keys; their outputs are unspecified.
Mat Encode(const ModelParameters& params, const FusedSequence& seq,
           std::span<const bool> mask = {});

struct Logits {
  Vector intent;
  Vector focus;
  Vector op;  // operations (CF) or chart types
  Mat ref;    // positions x ref_width: sampled cells (CF) or fields (chart)
};

Logits Forward(const ModelParameters& params, const ModelInput& input);

// Per-task binary labels; `ref` aligns with Logits::ref.
struct Labels {
  Vector intent;
  Vector focus;
  Vector op;
  Mat ref;
};

// Positive-class weights p_c = #neg / #pos per class (1 when a class has no
// positives).
struct PosWeights {
  Vector intent;
  Vector focus;
  Vector op;
  Vector ref;

  static PosWeights Ones(const ModelDims& dims);
};

struct LossBreakdown {
  double intent = 0.0;
  double focus = 0.0;
  double op = 0.0;
  double ref = 0.0;
  double total = 0.0;
};

// Weighted binary cross entropy of one logit.
double WeightedBce(double logit, double label, double pos_weight,
                   double sample_weight = 1.0);

// Each task loss is the mean weighted BCE over its elements;
// total = alpha*J_u + beta*J_d + gamma*J_o + delta*J_p. Throws
// ShapeMismatch.
LossBreakdown ComputeLoss(const Logits& logits, const Labels& labels,
                          const LossWeights& weights,
                          const PosWeights& pos_weights);

// One training example: inputs and labels.
struct TrainingExample {
  ModelInput input;
  Labels labels;
};

// Loss over a batch (task losses averaged over all elements of the batch)
// and its gradient with respect to every parameter. Examples are split into
// a fixed number of contiguous chunks whose partial gradients are summed in
// order, so the result does not depend on `threads`.
LossBreakdown BatchLossAndGradient(const ModelParameters& params,
                                   std::span<const TrainingExample* const> batch,
                                   const LossWeights& weights,
                                   const PosWeights& pos_weights,
                                   ParamBuffer* grad, std::size_t threads = 1);

LossBreakdown BatchLoss(const ModelParameters& params,
                        std::span<const TrainingExample* const> batch,
                        const LossWeights& weights,
                        const PosWeights& pos_weights);

double Sigmoid(double x);

}  // namespace tabsem

#endif  // TABSEM_MODEL_HPP_

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

#include <cmath>
#include <cstring>
#include <thread>

#include "encoder_internal.hpp"

namespace tabsem {

namespace {

// Gradients are always reduced over this many contiguous chunks so results
// are identical for any worker count.
constexpr std::size_t kGradChunks = 4;

double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// d/dz of WeightedBce.
double WeightedBceGrad(double z, double y, double p, double w) {
  const double s = Sigmoid(z);
  return w * (-p * y * (1.0 - s) + (1.0 - y) * s);
}

void CheckShapes(const Logits& l, const Labels& y) {
  if (l.intent.size() != y.intent.size() || l.focus.size() != y.focus.size() ||
      l.op.size() != y.op.size() || l.ref.rows() != y.ref.rows() ||
      l.ref.cols() != y.ref.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "labels do not match logits");
  }
}

void CheckPosWeights(const Logits& l, const PosWeights& pw) {
  if (pw.intent.size() != l.intent.size() ||
      pw.focus.size() != l.focus.size() || pw.op.size() != l.op.size() ||
      pw.ref.size() != l.ref.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "class weights do not match logits");
  }
}

struct TaskSums {
  double intent = 0.0, focus = 0.0, op = 0.0, ref = 0.0;
  void Add(const TaskSums& o) {
    intent += o.intent;
    focus += o.focus;
    op += o.op;
    ref += o.ref;
  }
};

struct TaskCounts {
  double intent = 0.0, focus = 0.0, op = 0.0, ref = 0.0;
};

TaskSums SumLosses(const Logits& l, const Labels& y, const PosWeights& pw) {
  TaskSums s;
  for (Eigen::Index i = 0; i < l.intent.size(); ++i) {
    s.intent += WeightedBce(l.intent(i), y.intent(i), pw.intent(i));
  }
  for (Eigen::Index i = 0; i < l.focus.size(); ++i) {
    s.focus += WeightedBce(l.focus(i), y.focus(i), pw.focus(i));
  }
  for (Eigen::Index i = 0; i < l.op.size(); ++i) {
    s.op += WeightedBce(l.op(i), y.op(i), pw.op(i));
  }
  for (Eigen::Index r = 0; r < l.ref.rows(); ++r) {
    for (Eigen::Index c = 0; c < l.ref.cols(); ++c) {
      s.ref += WeightedBce(l.ref(r, c), y.ref(r, c), pw.ref(c));
    }
  }
  return s;
}

double SafeDiv(double a, double b) { return b > 0.0 ? a / b : 0.0; }

LossBreakdown Combine(const TaskSums& s, const TaskCounts& n,
                      const LossWeights& w) {
  LossBreakdown out;
  out.intent = SafeDiv(s.intent, n.intent);
  out.focus = SafeDiv(s.focus, n.focus);
  out.op = SafeDiv(s.op, n.op);
  out.ref = SafeDiv(s.ref, n.ref);
  out.total = w.alpha * out.intent + w.beta * out.focus + w.gamma * out.op +
              w.delta * out.ref;
  return out;
}

TaskCounts CountElements(std::span<const TrainingExample* const> batch) {
  TaskCounts n;
  for (const TrainingExample* ex : batch) {
    n.intent += static_cast<double>(ex->labels.intent.size());
    n.focus += static_cast<double>(ex->labels.focus.size());
    n.op += static_cast<double>(ex->labels.op.size());
    n.ref += static_cast<double>(ex->labels.ref.size());
  }
  return n;
}

void WriteSlot(nlohmann::json* out, const std::string& name,
               const ParamBuffer& b, const Slot& s) {
  (*out)[name] = std::vector<double>(
      b.values.begin() + static_cast<std::ptrdiff_t>(s.offset),
      b.values.begin() + static_cast<std::ptrdiff_t>(s.offset + s.size()));
}

}  // namespace

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double WeightedBce(double logit, double label, double pos_weight,
                   double sample_weight) {
  // log sigmoid(z) = -softplus(-z); log(1 - sigmoid(z)) = -softplus(z).
  return sample_weight * (pos_weight * label * Softplus(-logit) +
                          (1.0 - label) * Softplus(logit));
}

PosWeights PosWeights::Ones(const ModelDims& dims) {
  PosWeights w;
  w.intent = Vector::Ones(static_cast<Eigen::Index>(dims.n_intent));
  w.focus = Vector::Ones(static_cast<Eigen::Index>(dims.n_focus));
  w.op = Vector::Ones(static_cast<Eigen::Index>(dims.n_op));
  w.ref = Vector::Ones(static_cast<Eigen::Index>(dims.ref_width));
  return w;
}

ModelInput MakeCFInput(const Vector& field_embed,
                       std::span<const double> field_sig,
                       std::span<const Vector> cell_embeds,
                       std::span<const std::vector<double>> cell_sigs) {
  if (cell_embeds.size() != cell_sigs.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cell embeddings and signatures differ in count");
  }
  const Eigen::Index e = field_embed.size();
  const Eigen::Index fs = static_cast<Eigen::Index>(field_sig.size());
  ModelInput in;
  in.field_rows.resize(1, e + fs);
  in.field_rows.row(0).head(e) = field_embed.transpose();
  for (Eigen::Index i = 0; i < fs; ++i) in.field_rows(0, e + i) = field_sig[i];
  const Eigen::Index b = static_cast<Eigen::Index>(cell_embeds.size());
  const Eigen::Index cs =
      b > 0 ? static_cast<Eigen::Index>(cell_sigs[0].size()) : 0;
  in.cell_rows.resize(b, e + cs);
  for (Eigen::Index k = 0; k < b; ++k) {
    if (cell_embeds[k].size() != e ||
        static_cast<Eigen::Index>(cell_sigs[k].size()) != cs) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged cell inputs");
    }
    in.cell_rows.row(k).head(e) = cell_embeds[k].transpose();
    for (Eigen::Index i = 0; i < cs; ++i) {
      in.cell_rows(k, e + i) = cell_sigs[k][i];
    }
  }
  return in;
}

LossBreakdown ComputeLoss(const Logits& logits, const Labels& labels,
                          const LossWeights& weights,
                          const PosWeights& pos_weights) {
  CheckShapes(logits, labels);
  CheckPosWeights(logits, pos_weights);
  TaskCounts n;
  n.intent = static_cast<double>(labels.intent.size());
  n.focus = static_cast<double>(labels.focus.size());
  n.op = static_cast<double>(labels.op.size());
  n.ref = static_cast<double>(labels.ref.size());
  return Combine(SumLosses(logits, labels, pos_weights), n, weights);
}

LossBreakdown BatchLoss(const ModelParameters& params,
                        std::span<const TrainingExample* const> batch,
                        const LossWeights& weights,
                        const PosWeights& pos_weights) {
  TaskSums sums;
  for (const TrainingExample* ex : batch) {
    const Logits l = Forward(params, ex->input);
    CheckShapes(l, ex->labels);
    CheckPosWeights(l, pos_weights);
    sums.Add(SumLosses(l, ex->labels, pos_weights));
  }
  return Combine(sums, CountElements(batch), weights);
}

LossBreakdown BatchLossAndGradient(const ModelParameters& params,
                                   std::span<const TrainingExample* const> batch,
                                   const LossWeights& weights,
                                   const PosWeights& pos_weights,
                                   ParamBuffer* grad, std::size_t threads) {
  if (grad->values.size() != params.buffer().values.size()) {
    grad->values.assign(params.buffer().values.size(), 0.0);
  } else {
    std::fill(grad->values.begin(), grad->values.end(), 0.0);
  }
  if (batch.empty()) return {};
  const TaskCounts n = CountElements(batch);
  const double ku = SafeDiv(weights.alpha, n.intent);
  const double kd = SafeDiv(weights.beta, n.focus);
  const double ko = SafeDiv(weights.gamma, n.op);
  const double kr = SafeDiv(weights.delta, n.ref);

  const std::size_t chunks = std::min(kGradChunks, batch.size());
  std::vector<ParamBuffer> partial(chunks);
  std::vector<TaskSums> sums(chunks);
  std::vector<std::exception_ptr> errors(chunks);

  auto run_chunk = [&](std::size_t c) {
    try {
      const std::size_t begin = batch.size() * c / chunks;
      const std::size_t end = batch.size() * (c + 1) / chunks;
      partial[c] = params.ZerosLike();
      internal::Tape tape;
      for (std::size_t i = begin; i < end; ++i) {
        const TrainingExample& ex = *batch[i];
        const Logits l = internal::ForwardWithTape(params, ex.input, &tape);
        CheckShapes(l, ex.labels);
        CheckPosWeights(l, pos_weights);
        sums[c].Add(SumLosses(l, ex.labels, pos_weights));
        Logits d;
        d.intent.resize(l.intent.size());
        d.focus.resize(l.focus.size());
        d.op.resize(l.op.size());
        d.ref.resize(l.ref.rows(), l.ref.cols());
        for (Eigen::Index k = 0; k < l.intent.size(); ++k) {
          d.intent(k) = ku * WeightedBceGrad(l.intent(k), ex.labels.intent(k),
                                             pos_weights.intent(k), 1.0);
        }
        for (Eigen::Index k = 0; k < l.focus.size(); ++k) {
          d.focus(k) = kd * WeightedBceGrad(l.focus(k), ex.labels.focus(k),
                                            pos_weights.focus(k), 1.0);
        }
        for (Eigen::Index k = 0; k < l.op.size(); ++k) {
          d.op(k) = ko * WeightedBceGrad(l.op(k), ex.labels.op(k),
                                         pos_weights.op(k), 1.0);
        }
        for (Eigen::Index r = 0; r < l.ref.rows(); ++r) {
          for (Eigen::Index k = 0; k < l.ref.cols(); ++k) {
            d.ref(r, k) = kr * WeightedBceGrad(l.ref(r, k), ex.labels.ref(r, k),
                                               pos_weights.ref(k), 1.0);
          }
        }
        internal::Backward(params, tape, d, &partial[c]);
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, chunks));
  if (workers == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  TaskSums total;
  for (std::size_t c = 0; c < chunks; ++c) {
    total.Add(sums[c]);
    for (std::size_t i = 0; i < grad->values.size(); ++i) {
      grad->values[i] += partial[c].values[i];
    }
  }
  return Combine(total, n, weights);
}

std::uint64_t ModelParameters::Checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : buffer_.values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

bool ModelParameters::AllFinite() const {
  for (double v : buffer_.values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

nlohmann::json ModelParameters::ToJson() const {
  nlohmann::json j;
  j["mode"] = dims_.mode == TaskMode::kCF ? "cf" : "chart";
  j["dims"] = {{"width", dims_.width},
               {"layers", dims_.layers},
               {"heads", dims_.heads},
               {"ffn", dims_.ffn},
               {"embed_dim", dims_.embed_dim},
               {"field_features", dims_.field_features},
               {"cell_features", dims_.cell_features},
               {"n_intent", dims_.n_intent},
               {"n_focus", dims_.n_focus},
               {"n_op", dims_.n_op},
               {"ref_width", dims_.ref_width}};
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, slot] : layout_.Named()) {
    WriteSlot(&tensors, name, buffer_, slot);
  }
  j["tensors"] = std::move(tensors);
  return j;
}

ModelParameters ModelParameters::FromJson(const nlohmann::json& j) {
  try {
    ModelParameters m;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "cf" && mode != "chart") {
      throw Error(ErrorCode::kParse, "unknown model mode: " + mode);
    }
    const nlohmann::json& d = j.at("dims");
    ModelDims& dims = m.dims_;
    dims.mode = mode == "cf" ? TaskMode::kCF : TaskMode::kChart;
    dims.width = d.at("width").get<std::size_t>();
    dims.layers = d.at("layers").get<std::size_t>();
    dims.heads = d.at("heads").get<std::size_t>();
    dims.ffn = d.at("ffn").get<std::size_t>();
    dims.embed_dim = d.at("embed_dim").get<std::size_t>();
    dims.field_features = d.at("field_features").get<std::size_t>();
    dims.cell_features = d.at("cell_features").get<std::size_t>();
    dims.n_intent = d.at("n_intent").get<std::size_t>();
    dims.n_focus = d.at("n_focus").get<std::size_t>();
    dims.n_op = d.at("n_op").get<std::size_t>();
    dims.ref_width = d.at("ref_width").get<std::size_t>();
    if (dims.heads == 0 || dims.width % dims.heads != 0) {
      throw Error(ErrorCode::kDimensionMismatch, "invalid head count");
    }
    m.layout_ = ModelLayout::For(dims);
    m.buffer_.values.assign(m.layout_.total, 0.0);
    const nlohmann::json& tensors = j.at("tensors");
    for (const auto& [name, slot] : m.layout_.Named()) {
      const std::vector<double> v = tensors.at(name).get<std::vector<double>>();
      if (v.size() != slot.size()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "tensor " + name + " has the wrong size");
      }
      std::copy(v.begin(), v.end(),
                m.buffer_.values.begin() +
                    static_cast<std::ptrdiff_t>(slot.offset));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad model file: ") + e.what());
  }
}

}  // namespace tabsem

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

#include <algorithm>
#include <cmath>
#include <limits>

#include "encoder_internal.hpp"
#include "rng.hpp"
#include "tabsem/record.hpp"
#include "tabsem/semantics.hpp"
#include "tabsem/signatures.hpp"

namespace tabsem {

namespace {

constexpr double kLayerNormEps = 1e-5;

using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

Mat Relu(const Mat& x) { return x.cwiseMax(0.0); }

// Row-wise layer norm; returns the output and stores 1/sigma per row.
Mat LayerNorm(const Mat& x, Eigen::Map<const Mat> g, Eigen::Map<const Mat> b,
              Vector* rstd) {
  const Eigen::Index n = x.rows();
  const double d = static_cast<double>(x.cols());
  Mat out(n, x.cols());
  rstd->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.row(i).sum() / d;
    const RowVec c = x.row(i).array() - mu;
    const double var = c.squaredNorm() / d;
    const double r = 1.0 / std::sqrt(var + kLayerNormEps);
    (*rstd)(i) = r;
    out.row(i) = (c * r).cwiseProduct(g.row(0)) + b.row(0);
  }
  return out;
}

Mat LayerNormBackward(const Mat& x, const Vector& rstd, const Mat& dy,
                      Eigen::Map<const Mat> g, Eigen::Map<Mat> dg,
                      Eigen::Map<Mat> db) {
  const Eigen::Index n = x.rows();
  const double d = static_cast<double>(x.cols());
  Mat dx(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.row(i).sum() / d;
    const RowVec xhat = (x.row(i).array() - mu) * rstd(i);
    dg.row(0) += dy.row(i).cwiseProduct(xhat);
    db.row(0) += dy.row(i);
    const RowVec dxhat = dy.row(i).cwiseProduct(g.row(0));
    const double m1 = dxhat.sum() / d;
    const double m2 = dxhat.cwiseProduct(xhat).sum() / d;
    dx.row(i) = rstd(i) * (dxhat.array() - m1 - xhat.array() * m2).matrix();
  }
  return dx;
}

Mat Linear(const Mat& x, Eigen::Map<const Mat> w, Eigen::Map<const Mat> b) {
  Mat y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

// Accumulates dW, db and returns dX.
Mat LinearBackward(const Mat& x, const Mat& dy, Eigen::Map<const Mat> w,
                   Eigen::Map<Mat> dw, Eigen::Map<Mat> db) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  return dy * w.transpose();
}

Slot Take(std::size_t* offset, std::size_t rows, std::size_t cols) {
  Slot s{*offset, rows, cols};
  *offset += rows * cols;
  return s;
}

FusedSequence FuseWithActivations(const ModelParameters& params,
                                  const ModelInput& input, Mat* field_act,
                                  Mat* cell_act) {
  const ModelDims& dims = params.dims();
  const ModelLayout& lay = params.layout();
  const ParamBuffer& p = params.buffer();
  if (static_cast<std::size_t>(input.field_rows.cols()) !=
      dims.field_features) {
    throw Error(ErrorCode::kDimensionMismatch,
                "field input width does not match the model");
  }
  if (input.field_rows.rows() == 0) {
    throw Error(ErrorCode::kEmptyInput, "no field rows");
  }
  *field_act = Relu(input.field_rows);
  const Mat fields = Linear(*field_act, p.M(lay.field_w), p.M(lay.field_b));
  FusedSequence seq;
  const Eigen::Index w = static_cast<Eigen::Index>(dims.width);
  if (dims.mode == TaskMode::kCF) {
    if (input.field_rows.rows() != 1) {
      throw Error(ErrorCode::kShapeMismatch, "CF input has one field row");
    }
    const Eigen::Index b = input.cell_rows.rows();
    if (b > 0 && static_cast<std::size_t>(input.cell_rows.cols()) !=
                     dims.cell_features) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "cell input width does not match the model");
    }
    seq.tokens.resize(1 + b, w);
    seq.tokens.row(0) = fields.row(0);
    seq.types.push_back(TokenType::kField);
    if (b > 0) {
      *cell_act = Relu(input.cell_rows);
      seq.tokens.bottomRows(b) =
          Linear(*cell_act, p.M(lay.cell_w), p.M(lay.cell_b));
    } else {
      cell_act->resize(0, static_cast<Eigen::Index>(dims.cell_features));
    }
    seq.types.insert(seq.types.end(), static_cast<std::size_t>(b),
                     TokenType::kCell);
  } else {
    const Eigen::Index n = fields.rows();
    seq.tokens.resize(1 + n, w);
    seq.tokens.row(0) = fields.colwise().mean();
    seq.tokens.bottomRows(n) = fields;
    seq.types.push_back(TokenType::kTable);
    seq.types.insert(seq.types.end(), static_cast<std::size_t>(n),
                     TokenType::kField);
    cell_act->resize(0, 0);
  }
  return seq;
}

Mat EncodeImpl(const ModelParameters& params, const FusedSequence& seq,
               std::span<const bool> mask, internal::Tape* tape) {
  const ModelDims& dims = params.dims();
  const ModelLayout& lay = params.layout();
  const ParamBuffer& p = params.buffer();
  const Eigen::Index t = seq.tokens.rows();
  if (static_cast<std::size_t>(seq.tokens.cols()) != dims.width ||
      seq.types.size() != static_cast<std::size_t>(t)) {
    throw Error(ErrorCode::kShapeMismatch, "sequence shape mismatch");
  }
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(t)) {
    throw Error(ErrorCode::kShapeMismatch, "mask length mismatch");
  }
  Mat x = seq.tokens;
  const auto type_emb = p.M(lay.token_type);
  for (Eigen::Index i = 0; i < t; ++i) {
    x.row(i) += type_emb.row(static_cast<int>(seq.types[i]));
  }
  const Eigen::Index heads = static_cast<Eigen::Index>(dims.heads);
  const Eigen::Index dh = static_cast<Eigen::Index>(dims.width / dims.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  if (tape != nullptr) tape->layers.resize(dims.layers);

  for (std::size_t l = 0; l < dims.layers; ++l) {
    const LayerSlots& ls = lay.layers[l];
    internal::LayerTape local;
    internal::LayerTape& lt = tape != nullptr ? tape->layers[l] : local;
    lt.x_in = x;
    lt.a = LayerNorm(x, p.M(ls.ln1_g), p.M(ls.ln1_b), &lt.rstd1);
    lt.q = Linear(lt.a, p.M(ls.wq), p.M(ls.bq));
    lt.k = Linear(lt.a, p.M(ls.wk), p.M(ls.bk));
    lt.v = Linear(lt.a, p.M(ls.wv), p.M(ls.bv));
    lt.attn.resize(t, x.cols());
    lt.probs.resize(static_cast<std::size_t>(heads));
    for (Eigen::Index h = 0; h < heads; ++h) {
      Mat s = (lt.q.middleCols(h * dh, dh) *
               lt.k.middleCols(h * dh, dh).transpose()) *
              scale;
      for (Eigen::Index i = 0; i < t; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < t; ++j) {
          if (mask.empty() || mask[j]) mx = std::max(mx, s(i, j));
        }
        double sum = 0.0;
        for (Eigen::Index j = 0; j < t; ++j) {
          const double e =
              (mask.empty() || mask[j]) ? std::exp(s(i, j) - mx) : 0.0;
          s(i, j) = e;
          sum += e;
        }
        if (sum > 0.0) s.row(i) /= sum;
      }
      lt.attn.middleCols(h * dh, dh) = s * lt.v.middleCols(h * dh, dh);
      lt.probs[static_cast<std::size_t>(h)] = std::move(s);
    }
    lt.x1 = x + Linear(lt.attn, p.M(ls.wo), p.M(ls.bo));
    lt.b = LayerNorm(lt.x1, p.M(ls.ln2_g), p.M(ls.ln2_b), &lt.rstd2);
    lt.hpre = Linear(lt.b, p.M(ls.w1), p.M(ls.b1));
    x = lt.x1 + Linear(Relu(lt.hpre), p.M(ls.w2), p.M(ls.b2));
  }
  Vector rstd_f;
  Mat y = LayerNorm(x, p.M(lay.lnf_g), p.M(lay.lnf_b), &rstd_f);
  if (tape != nullptr) {
    tape->x_final = std::move(x);
    tape->rstd_f = std::move(rstd_f);
    tape->y = y;
  }
  return y;
}

}  // namespace

ModelConfig ModelConfig::PaperScale() {
  ModelConfig c;
  c.width = 256;
  c.layers = 6;
  c.heads = 8;
  return c;
}

void ModelConfig::Validate() const {
  if (width == 0 || layers == 0 || heads == 0 || ffn_mult == 0 ||
      embed_dim == 0) {
    throw Error(ErrorCode::kInvalidSpec, "model sizes must be positive");
  }
  if (width % heads != 0) {
    throw Error(ErrorCode::kInvalidSpec, "width must be divisible by heads");
  }
  if (batch_size == 0 || max_epochs == 0 || !(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "invalid training settings");
  }
}

ModelDims ModelDims::For(TaskMode mode, const ModelConfig& config) {
  config.Validate();
  ModelDims d;
  d.mode = mode;
  d.width = config.width;
  d.layers = config.layers;
  d.heads = config.heads;
  d.ffn = config.width * config.ffn_mult;
  d.embed_dim = config.embed_dim;
  d.field_features = config.embed_dim + kFieldSignatureWidth;
  d.cell_features = config.embed_dim + kCellSignatureWidth;
  if (mode == TaskMode::kCF) {
    d.n_intent = kNumIntentsCF;
    d.n_focus = kNumFocusesCF;
    d.n_op = kNumOperations;
    d.ref_width = 1;
  } else {
    d.n_intent = kNumIntentsChart;
    d.n_focus = kNumFocusesChart;
    d.n_op = kNumChartTypes;
    d.ref_width = 2;
  }
  return d;
}

ModelLayout ModelLayout::For(const ModelDims& d) {
  ModelLayout l;
  std::size_t off = 0;
  l.field_w = Take(&off, d.field_features, d.width);
  l.field_b = Take(&off, 1, d.width);
  l.cell_w = Take(&off, d.cell_features, d.width);
  l.cell_b = Take(&off, 1, d.width);
  l.token_type = Take(&off, 3, d.width);
  for (std::size_t i = 0; i < d.layers; ++i) {
    LayerSlots s;
    s.ln1_g = Take(&off, 1, d.width);
    s.ln1_b = Take(&off, 1, d.width);
    s.wq = Take(&off, d.width, d.width);
    s.bq = Take(&off, 1, d.width);
    s.wk = Take(&off, d.width, d.width);
    s.bk = Take(&off, 1, d.width);
    s.wv = Take(&off, d.width, d.width);
    s.bv = Take(&off, 1, d.width);
    s.wo = Take(&off, d.width, d.width);
    s.bo = Take(&off, 1, d.width);
    s.ln2_g = Take(&off, 1, d.width);
    s.ln2_b = Take(&off, 1, d.width);
    s.w1 = Take(&off, d.width, d.ffn);
    s.b1 = Take(&off, 1, d.ffn);
    s.w2 = Take(&off, d.ffn, d.width);
    s.b2 = Take(&off, 1, d.width);
    l.layers.push_back(s);
  }
  l.lnf_g = Take(&off, 1, d.width);
  l.lnf_b = Take(&off, 1, d.width);
  l.intent_w = Take(&off, d.width, d.n_intent);
  l.intent_b = Take(&off, 1, d.n_intent);
  l.focus_w = Take(&off, d.width, d.n_focus);
  l.focus_b = Take(&off, 1, d.n_focus);
  l.op_w = Take(&off, d.width, d.n_op);
  l.op_b = Take(&off, 1, d.n_op);
  l.ref_w = Take(&off, d.width, d.ref_width);
  l.ref_b = Take(&off, 1, d.ref_width);
  l.total = off;
  return l;
}

std::vector<std::pair<std::string, Slot>> ModelLayout::Named() const {
  std::vector<std::pair<std::string, Slot>> out = {
      {"field_w", field_w}, {"field_b", field_b},       {"cell_w", cell_w},
      {"cell_b", cell_b},   {"token_type", token_type},
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSlots& s = layers[i];
    const std::string pre = "layer" + std::to_string(i) + ".";
    for (const auto& [name, slot] :
         std::initializer_list<std::pair<const char*, Slot>>{
             {"ln1_g", s.ln1_g}, {"ln1_b", s.ln1_b}, {"wq", s.wq},
             {"bq", s.bq},       {"wk", s.wk},       {"bk", s.bk},
             {"wv", s.wv},       {"bv", s.bv},       {"wo", s.wo},
             {"bo", s.bo},       {"ln2_g", s.ln2_g}, {"ln2_b", s.ln2_b},
             {"w1", s.w1},       {"b1", s.b1},       {"w2", s.w2},
             {"b2", s.b2}}) {
      out.emplace_back(pre + name, slot);
    }
  }
  for (const auto& [name, slot] :
       std::initializer_list<std::pair<const char*, Slot>>{
           {"lnf_g", lnf_g},
           {"lnf_b", lnf_b},
           {"intent_w", intent_w},
           {"intent_b", intent_b},
           {"focus_w", focus_w},
           {"focus_b", focus_b},
           {"op_w", op_w},
           {"op_b", op_b},
           {"ref_w", ref_w},
           {"ref_b", ref_b}}) {
    out.emplace_back(name, slot);
  }
  return out;
}

ModelParameters::ModelParameters(const ModelDims& dims, std::uint64_t seed)
    : dims_(dims), layout_(ModelLayout::For(dims)) {
  buffer_.values.assign(layout_.total, 0.0);
  internal::Rng rng(seed);
  auto xavier = [&](const Slot& s) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    for (std::size_t i = 0; i < s.size(); ++i) {
      buffer_.values[s.offset + i] = rng.Uniform(-limit, limit);
    }
  };
  auto ones = [&](const Slot& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      buffer_.values[s.offset + i] = 1.0;
    }
  };
  xavier(layout_.field_w);
  xavier(layout_.cell_w);
  for (std::size_t i = 0; i < layout_.token_type.size(); ++i) {
    buffer_.values[layout_.token_type.offset + i] = rng.Uniform(-0.1, 0.1);
  }
  for (const LayerSlots& s : layout_.layers) {
    ones(s.ln1_g);
    ones(s.ln2_g);
    xavier(s.wq);
    xavier(s.wk);
    xavier(s.wv);
    xavier(s.wo);
    xavier(s.w1);
    xavier(s.w2);
  }
  ones(layout_.lnf_g);
  // Output heads start at zero.
}

ParamBuffer ModelParameters::ZerosLike() const {
  ParamBuffer b;
  b.values.assign(buffer_.values.size(), 0.0);
  return b;
}

FusedSequence FuseInputs(const ModelParameters& params,
                         const ModelInput& input) {
  Mat field_act, cell_act;
  return FuseWithActivations(params, input, &field_act, &cell_act);
}

Mat Encode(const ModelParameters& params, const FusedSequence& seq,
           std::span<const bool> mask) {
  return EncodeImpl(params, seq, mask, nullptr);
}

namespace internal {

Logits ForwardWithTape(const ModelParameters& params, const ModelInput& input,
                       Tape* tape) {
  Mat field_act, cell_act;
  FusedSequence seq =
      FuseWithActivations(params, input, &field_act, &cell_act);
  const Mat y = EncodeImpl(params, seq, {}, tape);
  const ModelLayout& lay = params.layout();
  const ParamBuffer& p = params.buffer();
  Logits out;
  const Mat head_in = y.topRows(1);
  out.intent = Linear(head_in, p.M(lay.intent_w), p.M(lay.intent_b))
                   .row(0)
                   .transpose();
  out.focus =
      Linear(head_in, p.M(lay.focus_w), p.M(lay.focus_b)).row(0).transpose();
  out.op = Linear(head_in, p.M(lay.op_w), p.M(lay.op_b)).row(0).transpose();
  out.ref = Linear(y.bottomRows(y.rows() - 1), p.M(lay.ref_w),
                   p.M(lay.ref_b));
  if (tape != nullptr) {
    tape->field_act = std::move(field_act);
    tape->cell_act = std::move(cell_act);
    tape->types = std::move(seq.types);
  }
  return out;
}

void Backward(const ModelParameters& params, const Tape& tape,
              const Logits& dl, ParamBuffer* grad) {
  const ModelDims& dims = params.dims();
  const ModelLayout& lay = params.layout();
  const ParamBuffer& p = params.buffer();
  ParamBuffer& g = *grad;
  const Eigen::Index t = tape.y.rows();

  // Heads.
  Mat dy = Mat::Zero(t, tape.y.cols());
  const Mat head_in = tape.y.topRows(1);
  auto head = [&](const Vector& d, const Slot& w, const Slot& b) {
    const Mat drow = d.transpose();
    dy.row(0) += LinearBackward(head_in, drow, p.M(w), g.M(w), g.M(b));
  };
  head(dl.intent, lay.intent_w, lay.intent_b);
  head(dl.focus, lay.focus_w, lay.focus_b);
  head(dl.op, lay.op_w, lay.op_b);
  if (t > 1) {
    dy.bottomRows(t - 1) +=
        LinearBackward(tape.y.bottomRows(t - 1), dl.ref, p.M(lay.ref_w),
                       g.M(lay.ref_w), g.M(lay.ref_b));
  }

  Mat dx = LayerNormBackward(tape.x_final, tape.rstd_f, dy, p.M(lay.lnf_g),
                             g.M(lay.lnf_g), g.M(lay.lnf_b));

  const Eigen::Index heads = static_cast<Eigen::Index>(dims.heads);
  const Eigen::Index dh = static_cast<Eigen::Index>(dims.width / dims.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t li = dims.layers; li-- > 0;) {
    const LayerSlots& ls = lay.layers[li];
    const internal::LayerTape& lt = tape.layers[li];
    // FFN block: x = x1 + relu(hpre) W2 + b2.
    const Mat hact = Relu(lt.hpre);
    Mat dh_act =
        LinearBackward(hact, dx, p.M(ls.w2), g.M(ls.w2), g.M(ls.b2));
    dh_act = dh_act.cwiseProduct(
        (lt.hpre.array() > 0.0).cast<double>().matrix());
    const Mat db_ln =
        LinearBackward(lt.b, dh_act, p.M(ls.w1), g.M(ls.w1), g.M(ls.b1));
    Mat dx1 = dx + LayerNormBackward(lt.x1, lt.rstd2, db_ln, p.M(ls.ln2_g),
                                     g.M(ls.ln2_g), g.M(ls.ln2_b));
    // Attention block: x1 = x_in + attn Wo + bo.
    const Mat dattn =
        LinearBackward(lt.attn, dx1, p.M(ls.wo), g.M(ls.wo), g.M(ls.bo));
    Mat dq(t, lt.q.cols()), dk(t, lt.k.cols()), dv(t, lt.v.cols());
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Mat& pr = lt.probs[static_cast<std::size_t>(h)];
      const Mat doh = dattn.middleCols(h * dh, dh);
      const Mat dp = doh * lt.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = pr.transpose() * doh;
      Mat ds = pr.cwiseProduct(dp);
      const Vector rs = ds.rowwise().sum();
      ds -= pr.cwiseProduct(rs.replicate(1, t));
      ds *= scale;
      dq.middleCols(h * dh, dh) = ds * lt.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = ds.transpose() * lt.q.middleCols(h * dh, dh);
    }
    Mat da = LinearBackward(lt.a, dq, p.M(ls.wq), g.M(ls.wq), g.M(ls.bq));
    da += LinearBackward(lt.a, dk, p.M(ls.wk), g.M(ls.wk), g.M(ls.bk));
    da += LinearBackward(lt.a, dv, p.M(ls.wv), g.M(ls.wv), g.M(ls.bv));
    dx = dx1 + LayerNormBackward(lt.x_in, lt.rstd1, da, p.M(ls.ln1_g),
                                 g.M(ls.ln1_g), g.M(ls.ln1_b));
  }

  // Token types and fusion.
  auto dtype = g.M(lay.token_type);
  for (Eigen::Index i = 0; i < t; ++i) {
    dtype.row(static_cast<int>(tape.types[i])) += dx.row(i);
  }
  if (dims.mode == TaskMode::kCF) {
    LinearBackward(tape.field_act, dx.topRows(1), p.M(lay.field_w),
                   g.M(lay.field_w), g.M(lay.field_b));
    if (t > 1) {
      LinearBackward(tape.cell_act, dx.bottomRows(t - 1), p.M(lay.cell_w),
                     g.M(lay.cell_w), g.M(lay.cell_b));
    }
  } else {
    Mat dfields = dx.bottomRows(t - 1);
    dfields.rowwise() += dx.row(0) / static_cast<double>(t - 1);
    LinearBackward(tape.field_act, dfields, p.M(lay.field_w),
                   g.M(lay.field_w), g.M(lay.field_b));
  }
}

}  // namespace internal

Logits Forward(const ModelParameters& params, const ModelInput& input) {
  return internal::ForwardWithTape(params, input, nullptr);
}

}  // namespace tabsem

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

#ifndef TABSEM_SRC_ENCODER_INTERNAL_HPP_
#define TABSEM_SRC_ENCODER_INTERNAL_HPP_

#include <vector>

#include "tabsem/model.hpp"

namespace tabsem::internal {

struct LayerTape {
  Mat x_in;
  Mat a;  // LN1 output
  Vector rstd1;
  Mat q, k, v;
  std::vector<Mat> probs;  // one T x T matrix per head
  Mat attn;                // concatenated head outputs
  Mat x1;
  Mat b;  // LN2 output
  Vector rstd2;
  Mat hpre;
};

// Activations kept from a forward pass for the backward pass.
struct Tape {
  Mat field_act;  // relu(field_rows)
  Mat cell_act;   // relu(cell_rows)
  std::vector<TokenType> types;
  std::vector<LayerTape> layers;
  Mat x_final;
  Vector rstd_f;
  Mat y;  // final LN output
};

Logits ForwardWithTape(const ModelParameters& params, const ModelInput& input,
                       Tape* tape);

// Accumulates parameter gradients for upstream logit gradients.
void Backward(const ModelParameters& params, const Tape& tape,
              const Logits& dlogits, ParamBuffer* grad);

}  // namespace tabsem::internal

#endif  // TABSEM_SRC_ENCODER_INTERNAL_HPP_

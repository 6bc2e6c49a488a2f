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

// Brute-force CF ranking and random scoring fixtures.

#ifndef TABSEM_TESTS_RECOMMEND_ORACLE_HPP_
#define TABSEM_TESTS_RECOMMEND_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tabsem/executor.hpp"
#include "tabsem/recommend.hpp"

namespace tabsem::testing {

struct OracleRecord {
  OperationCF op;
  std::vector<ParamValue> params;
  double score;
};

// Every combination of accepted candidates of the required size, scored as
// op probability times the parameter probabilities in ascending order.
inline std::vector<OracleRecord> OracleRankCF(const CFScoringProblem& problem,
                                              const Field& field,
                                              const RecommendOptions& options) {
  std::vector<OracleRecord> all;
  for (std::size_t o = 0; o < kNumOperations; ++o) {
    if (!problem.allowed[o]) continue;
    const auto op = static_cast<OperationCF>(o);
    const std::size_t m =
        IsMultiBucket(op) ? std::clamp<std::size_t>(options.bucket_parameters, 2, 4)
                          : MinArity(op);
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < problem.candidates.size(); ++i) {
      if (AcceptsCandidate(op, problem.candidates[i])) ok.push_back(i);
    }
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
      if (pick.size() == m) {
        std::vector<std::size_t> sorted = pick;
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
          return ParamLess(problem.candidates[a].value, problem.candidates[b].value);
        });
        OracleRecord r{op, {}, problem.op_prob[o]};
        for (std::size_t c : sorted) {
          r.params.push_back(problem.candidates[c].value);
          r.score *= problem.candidate_prob[c];
        }
        if (IsExecutable(op, r.params, field)) all.push_back(std::move(r));
        return;
      }
      for (std::size_t i = from; i < ok.size(); ++i) {
        pick.push_back(ok[i]);
        rec(i + 1);
        pick.pop_back();
      }
    };
    rec(0);
  }
  std::sort(all.begin(), all.end(), [](const OracleRecord& a, const OracleRecord& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.op != b.op) return a.op < b.op;
    return std::lexicographical_compare(a.params.begin(), a.params.end(),
                                        b.params.begin(), b.params.end(), ParamLess);
  });
  if (all.size() > options.k) all.resize(options.k);
  return all;
}

inline bool SameRanking(const std::vector<CFRecommendation>& got,
                        const std::vector<OracleRecord>& want, std::string* why) {
  if (got.size() != want.size()) {
    *why = "size " + std::to_string(got.size()) + " vs " + std::to_string(want.size());
    return false;
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    const bool params_equal =
        got[i].parameters.size() == want[i].params.size() &&
        std::equal(got[i].parameters.begin(), got[i].parameters.end(),
                   want[i].params.begin(), ParamEquals);
    if (got[i].operation != want[i].op || !params_equal ||
        std::abs(got[i].score - want[i].score) > 1e-12 * std::max(1.0, want[i].score)) {
      *why = "rank " + std::to_string(i) + ": " + OperationName(got[i].operation) +
             " vs " + OperationName(want[i].op);
      return false;
    }
  }
  return true;
}

// A random field of at most `max_cells` cells mixing numbers, repeats,
// blanks, errors and text, plus random logits over its sampled cells.
struct RankFixture {
  Table table;
  std::vector<CellSignature> sigs;
  std::vector<std::size_t> sampled;
  Logits logits;
};

inline RankFixture RandomRankFixture(std::mt19937_64& rng, std::size_t max_cells) {
  std::uniform_int_distribution<std::size_t> len(2, max_cells);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 2.0);
  const std::size_t n = len(rng);
  const bool numeric = u(rng) < 0.75;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = u(rng);
    std::string v;
    if (r < 0.1) {
      v = "";
    } else if (r < 0.18) {
      v = "#N/A";
    } else if (numeric) {
      v = std::to_string(static_cast<int>(std::floor(u(rng) * 120.0)) - 10);
    } else {
      static const char* kWords[] = {"open", "closed", "n/a", "pending", "done"};
      v = kWords[rng() % 5];
    }
    rows.push_back({v});
  }
  RankFixture f;
  f.table = MakeTable("fx", {numeric ? "Score" : "Status"}, rows);
  const Field& field = f.table.fields[0];
  f.sigs = ComputeCellSignatures(field, Vocabulary::Default());
  f.sampled = SampleCells(field, f.sigs);
  const auto draw = [&](Eigen::Index size) {
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = normal(rng);
    return v;
  };
  f.logits.intent = draw(kNumIntentsCF);
  f.logits.focus = draw(kNumFocusesCF);
  f.logits.op = draw(kNumOperations);
  f.logits.ref = draw(static_cast<Eigen::Index>(f.sampled.size()));
  // Coarse values make exact score ties common.
  if (rng() % 3 == 0) f.logits.ref = f.logits.ref.array().round();
  return f;
}

}  // namespace tabsem::testing

#endif  // TABSEM_TESTS_RECOMMEND_ORACLE_HPP_

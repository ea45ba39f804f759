// Copyright 2026 The xdevmatch Authors.
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

#include "xdevmatch/evaluate.h"

#include <algorithm>
#include <ostream>

namespace xdm {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

EvalReport score_submission(const std::vector<CandidatePair>& predicted,
                            const PairSet& truth, int64_t k) {
  if (truth.empty()) throw Error("score_submission: empty truth set");
  if (k < 0) throw Error("score_submission: k must be >= 0");
  EvalReport r;
  r.k = k;
  r.truth_size = static_cast<int64_t>(truth.size());
  r.predicted = std::min<int64_t>(k, static_cast<int64_t>(predicted.size()));
  r.clamped = k > static_cast<int64_t>(predicted.size());
  PairSet seen;
  for (int64_t i = 0; i < r.predicted; ++i) {
    const auto& p = predicted[i];
    if (!seen.insert(p).second) {
      throw Error("score_submission: duplicate prediction " + p.a() + "," + p.b());
    }
    r.true_positives += truth.count(p) ? 1 : 0;
  }
  r.precision = r.predicted > 0 ? static_cast<double>(r.true_positives) /
                                      static_cast<double>(r.predicted)
                                : 0.0;
  r.recall = static_cast<double>(r.true_positives) / static_cast<double>(r.truth_size);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

std::vector<EvalReport> f1_curve(const std::vector<CandidatePair>& predicted,
                                 const PairSet& truth,
                                 const std::vector<int64_t>& ks) {
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || (i > 0 && ks[i] <= ks[i - 1])) {
      throw Error("f1_curve: ks must be positive and strictly ascending");
    }
  }
  std::vector<EvalReport> out;
  out.reserve(ks.size());
  for (const auto k : ks) out.push_back(score_submission(predicted, truth, k));
  return out;
}

void write_eval_lines(std::ostream& out, const std::vector<EvalReport>& reports) {
  for (const auto& r : reports) {
    out << r.k << ' ' << r.precision << ' ' << r.recall << ' ' << r.f1 << ' '
        << r.true_positives << '\n';
  }
}

void write_eval_block(std::ostream& out, const EvalReport& r) {
  out << "k=" << r.k << '\n'
      << "precision=" << r.precision << '\n'
      << "recall=" << r.recall << '\n'
      << "f1=" << r.f1 << '\n'
      << "true_positives=" << r.true_positives << '\n'
      << "predicted=" << r.predicted << '\n'
      << "truth_size=" << r.truth_size << '\n'
      << "clamped=" << (r.clamped ? "true" : "false") << '\n';
}

}  // namespace xdm

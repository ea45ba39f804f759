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

#ifndef XDEVMATCH_EVALUATE_H_
#define XDEVMATCH_EVALUATE_H_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "xdevmatch/common.h"

namespace xdm {

struct EvalReport {
  int64_t k = 0;  // requested cutoff
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t true_positives = 0;
  int64_t predicted = 0;  // predictions actually scored, min(k, list size)
  int64_t truth_size = 0;
  bool clamped = false;  // k exceeded the list length
};

// Harmonic mean, 0 when precision + recall is 0.
double f1_score(double precision, double recall);

// Scores the first k predictions. Raises Error on empty truth, k < 0 or
// duplicate predictions.
EvalReport score_submission(const std::vector<CandidatePair>& predicted,
                            const PairSet& truth, int64_t k);

// One report per k; ks must be positive and ascending.
std::vector<EvalReport> f1_curve(const std::vector<CandidatePair>& predicted,
                                 const PairSet& truth,
                                 const std::vector<int64_t>& ks);

// `k precision recall f1 tp` text lines.
void write_eval_lines(std::ostream& out, const std::vector<EvalReport>& reports);
// Machine-readable `key=value` block for one report.
void write_eval_block(std::ostream& out, const EvalReport& report);

}  // namespace xdm

#endif  // XDEVMATCH_EVALUATE_H_

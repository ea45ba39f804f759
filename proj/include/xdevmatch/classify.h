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

// Pairwise scorer: gradient-boosted regression trees on logistic loss.
//
// Each round fits a depth-limited tree to the residuals y - p with exact
// greedy splits (variance reduction over presorted feature columns), then
// sets every leaf to the Newton step sum(residual) / sum(p (1 - p)) scaled by
// the learning rate.

#ifndef XDEVMATCH_CLASSIFY_H_
#define XDEVMATCH_CLASSIFY_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xdevmatch/common.h"
#include "xdevmatch/pairfeat.h"

namespace xdm {

struct LabeledPair {
  CandidatePair pair;
  FeatureVector features;
  int label = 0;
  bool in_candidates = true;  // false for truth pairs the KNN union missed
};

// Positives are the truth pairs inside `train_users` (flagged when KNN missed
// them); negatives are candidates outside the truth, capped at
// floor(neg_ratio * positives) by a seeded shuffle. Output is sorted by pair
// and carries no features yet. Raises Error when there are no positives.
std::vector<LabeledPair> sample_training_pairs(
    const std::vector<UserId>& train_users,
    const std::set<CandidatePair>& candidates, const PairSet& truth,
    double neg_ratio, uint64_t seed);

struct GbdtParams {
  int n_trees = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_leaf = 10;
  double subsample = 1.0;
  uint64_t seed = 1;

  void validate() const;
};

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x <= threshold goes left
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0;  // leaf output, learning rate already applied
  double gain = 0.0;   // split gain, 0 for leaves
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
};

struct TrainingTelemetry {
  double initial_logloss = 0.0;
  std::vector<double> round_logloss;  // mean training logloss after each round
  double total_gain = 0.0;
};

class PairClassifier {
 public:
  FeatureSchema schema;
  GbdtParams params;
  double base_score = 0.0;  // log-odds of the training positive rate
  std::vector<RegressionTree> trees;
  TrainingTelemetry telemetry;

  double margin(std::span<const double> x) const;
  // sigmoid(margin). Raises Error when x does not match the schema length.
  double predict(std::span<const double> x) const;
};

// Raises Error on empty or single-class data and on non-finite features.
PairClassifier train_gbdt(const std::vector<FeatureVector>& rows,
                          const std::vector<int>& labels,
                          const FeatureSchema& schema, const GbdtParams& params);
PairClassifier train_gbdt(const std::vector<LabeledPair>& data,
                          const FeatureSchema& schema, const GbdtParams& params);

struct ScoredPair {
  CandidatePair pair;
  double score = 0.0;
};

// Descending score, ties by canonical pair order. `schema` describes the
// feature columns and must equal the classifier's.
std::vector<ScoredPair> score_pairs(const PairClassifier& clf,
                                    const FeatureSchema& schema,
                                    const std::vector<CandidatePair>& pairs,
                                    const std::vector<FeatureVector>& features);

// Total split gain per schema feature; unused features report 0.
std::map<std::string, double> feature_importance(const PairClassifier& clf);

// `feature TAB gain`, descending gain then name.
void write_importance_report(std::ostream& out,
                             const std::map<std::string, double>& importance);

// Area under the ROC curve with tied scores sharing average rank.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

void write_classifier_artifact(std::ostream& out, const PairClassifier& clf);
PairClassifier read_classifier_artifact(std::istream& in);

// Scored pairs file: `a,b,score` lines, score in round-trip precision.
void write_scored_pairs(std::ostream& out, const std::vector<ScoredPair>& pairs);
std::vector<ScoredPair> read_scored_pairs(std::istream& in);

}  // namespace xdm

#endif  // XDEVMATCH_CLASSIFY_H_

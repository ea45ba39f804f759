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

// Cluster-merging inference over score-sorted pairs.
//
// Every user starts in its own cluster. Pairs are visited in order; when the
// endpoints sit in different clusters and the merge condition accepts, the
// two clusters merge and every cross pair between them is emitted.

#ifndef XDEVMATCH_INFER_H_
#define XDEVMATCH_INFER_H_

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "xdevmatch/classify.h"
#include "xdevmatch/common.h"

namespace xdm {

// Disjoint-set forest over user ids with union by size, path compression
// and per-root member lists.
class ClusterState {
 public:
  // Returns the dense index of `user`, adding a singleton cluster if new.
  uint32_t add(const UserId& user);

  uint32_t find(uint32_t x);
  uint32_t find(const UserId& user);
  size_t size_of(uint32_t root) const { return members_[root].size(); }
  // Members in merge order: the first cluster's members, then the second's.
  const std::vector<uint32_t>& members(uint32_t root) const {
    return members_[root];
  }
  const UserId& user(uint32_t x) const { return users_[x]; }
  size_t user_count() const { return users_.size(); }

  // Merges the clusters rooted at ra and rb; returns the new root.
  uint32_t merge(uint32_t ra, uint32_t rb);

 private:
  std::vector<UserId> users_;
  std::unordered_map<UserId, uint32_t> index_;
  std::vector<uint32_t> parent_;
  std::vector<std::vector<uint32_t>> members_;
};

struct MergeCondition {
  enum class Kind { kBlind, kSupervised, kUnsupervised };

  Kind kind = Kind::kBlind;
  const PairClassifier* voter = nullptr;
  double alpha = 0.5;  // supervised: mean cross-pair vote must exceed this
  int beta = 5;        // unsupervised: merged cluster size cap

  static MergeCondition blind() { return {}; }
  static MergeCondition supervised(const PairClassifier* voter,
                                   double alpha = 0.5) {
    return {Kind::kSupervised, voter, alpha, 5};
  }
  static MergeCondition unsupervised(int beta = 5) {
    return {Kind::kUnsupervised, nullptr, 0.5, beta};
  }

  void validate() const;
};

using FeatureSource = std::function<FeatureVector(const CandidatePair&)>;

struct InferenceStats {
  size_t merges = 0;
  size_t rejected = 0;
  size_t max_cluster_size = 1;
};

// Raises Error when the input is not sorted by non-increasing score, or when
// a supervised condition lacks a voter or feature source.
std::vector<CandidatePair> merge_inference(const std::vector<ScoredPair>& sorted,
                                           const MergeCondition& cond,
                                           const FeatureSource& features = {},
                                           InferenceStats* stats = nullptr);

struct VoterTraining {
  PairClassifier voter;
  std::vector<LabeledPair> data;  // blind-extended pairs with labels
};

// Blind inference over `sorted`, labels the extended pairs against `truth`
// and trains a fresh classifier on them.
VoterTraining train_voter(const std::vector<ScoredPair>& sorted,
                          const PairSet& truth, const FeatureSource& features,
                          const FeatureSchema& schema, const GbdtParams& params);

struct SelectionParams {
  size_t n_sup = 0;
  size_t n_unsup = 0;
  size_t n_final = 0;
  bool use_supervised = true;
  bool use_unsupervised = true;
  double alpha = 0.5;
  int beta = 5;

  // Budget ratios 0.375 / 0.667 / 1.0 of n_final (45k/80k/120k), with every
  // count capped at `available` scored pairs.
  static SelectionParams from_budget(size_t n_final, size_t available,
                                     double sup_ratio = 0.375,
                                     double unsup_ratio = 0.667);
};

// Concatenates the lists in order, keeps the first occurrence of each pair
// and truncates to n_final.
std::vector<CandidatePair> combine_selection(
    const std::vector<std::vector<CandidatePair>>& lists, size_t n_final);

struct SelectionResult {
  std::vector<CandidatePair> supervised;    // extended by supervised merging
  std::vector<CandidatePair> unsupervised;  // extended by size-capped merging
  std::vector<CandidatePair> submission;
};

// Supervised-extended, then unsupervised-extended, then the sorted pairs.
// Raises Error unless n_sup <= n_unsup <= scored.size().
SelectionResult final_selection(const std::vector<ScoredPair>& scored,
                                const PairClassifier* voter,
                                const FeatureSource& features,
                                const SelectionParams& params);

}  // namespace xdm

#endif  // XDEVMATCH_INFER_H_

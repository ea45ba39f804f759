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

#include "xdevmatch/infer.h"

#include <algorithm>
#include <cmath>

namespace xdm {

uint32_t ClusterState::add(const UserId& user) {
  const auto [it, inserted] =
      index_.try_emplace(user, static_cast<uint32_t>(users_.size()));
  if (inserted) {
    users_.push_back(user);
    parent_.push_back(it->second);
    members_.push_back({it->second});
  }
  return it->second;
}

uint32_t ClusterState::find(uint32_t x) {
  uint32_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const uint32_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

uint32_t ClusterState::find(const UserId& user) {
  const auto it = index_.find(user);
  if (it == index_.end()) throw Error("ClusterState: unknown user " + user);
  return find(it->second);
}

uint32_t ClusterState::merge(uint32_t ra, uint32_t rb) {
  if (ra == rb) return ra;
  std::vector<uint32_t> combined;
  combined.reserve(members_[ra].size() + members_[rb].size());
  combined.insert(combined.end(), members_[ra].begin(), members_[ra].end());
  combined.insert(combined.end(), members_[rb].begin(), members_[rb].end());
  // Union by size decides only the forest shape.
  const uint32_t root = members_[ra].size() >= members_[rb].size() ? ra : rb;
  const uint32_t child = root == ra ? rb : ra;
  parent_[child] = root;
  members_[child].clear();
  members_[child].shrink_to_fit();
  members_[root] = std::move(combined);
  return root;
}

void MergeCondition::validate() const {
  switch (kind) {
    case Kind::kBlind:
      return;
    case Kind::kSupervised:
      if (voter == nullptr) throw Error("supervised inference needs a voter");
      if (!(alpha > 0 && alpha < 1)) throw Error("alpha must be in (0, 1)");
      return;
    case Kind::kUnsupervised:
      if (beta < 2) throw Error("beta must be >= 2");
      return;
  }
}

std::vector<CandidatePair> merge_inference(const std::vector<ScoredPair>& sorted,
                                           const MergeCondition& cond,
                                           const FeatureSource& features,
                                           InferenceStats* stats) {
  cond.validate();
  if (cond.kind == MergeCondition::Kind::kSupervised && !features) {
    throw Error("supervised inference needs a feature source");
  }
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].score > sorted[i - 1].score) {
      throw Error("merge_inference: pairs not sorted by descending score at " +
                  std::to_string(i));
    }
  }

  ClusterState clusters;
  for (const auto& sp : sorted) {
    clusters.add(sp.pair.a());
    clusters.add(sp.pair.b());
  }
  std::unordered_map<CandidatePair, double, PairHash> votes;
  auto vote = [&](const CandidatePair& p) {
    const auto it = votes.find(p);
    if (it != votes.end()) return it->second;
    const double v = cond.voter->predict(features(p));
    votes.emplace(p, v);
    return v;
  };

  InferenceStats local;
  std::vector<CandidatePair> extended;
  for (const auto& sp : sorted) {
    const uint32_t lu = clusters.find(sp.pair.a());
    const uint32_t lv = clusters.find(sp.pair.b());
    if (lu == lv) continue;
    const auto& cu = clusters.members(lu);
    const auto& cv = clusters.members(lv);

    bool accept = true;
    switch (cond.kind) {
      case MergeCondition::Kind::kBlind:
        break;
      case MergeCondition::Kind::kUnsupervised:
        accept = cu.size() + cv.size() <= static_cast<size_t>(cond.beta);
        break;
      case MergeCondition::Kind::kSupervised: {
        double total = 0.0;
        for (const uint32_t i : cu) {
          for (const uint32_t j : cv) {
            total += vote(CandidatePair(clusters.user(i), clusters.user(j)));
          }
        }
        accept = total / static_cast<double>(cu.size() * cv.size()) > cond.alpha;
        break;
      }
    }
    if (!accept) {
      ++local.rejected;
      continue;
    }
    for (const uint32_t i : cu) {
      for (const uint32_t j : cv) {
        extended.emplace_back(clusters.user(i), clusters.user(j));
      }
    }
    const uint32_t root = clusters.merge(lu, lv);
    ++local.merges;
    local.max_cluster_size = std::max(local.max_cluster_size, clusters.size_of(root));
  }
  if (stats != nullptr) *stats = local;
  return extended;
}

VoterTraining train_voter(const std::vector<ScoredPair>& sorted,
                          const PairSet& truth, const FeatureSource& features,
                          const FeatureSchema& schema, const GbdtParams& params) {
  if (!features) throw Error("train_voter: missing feature source");
  VoterTraining out;
  for (auto& p : merge_inference(sorted, MergeCondition::blind())) {
    const int label = truth.count(p) ? 1 : 0;
    auto f = features(p);
    out.data.push_back({std::move(p), std::move(f), label, true});
  }
  out.voter = train_gbdt(out.data, schema, params);
  return out;
}

SelectionParams SelectionParams::from_budget(size_t n_final, size_t available,
                                             double sup_ratio,
                                             double unsup_ratio) {
  if (!(sup_ratio >= 0 && sup_ratio <= unsup_ratio && unsup_ratio <= 1)) {
    throw Error("selection ratios must satisfy 0 <= sup <= unsup <= 1");
  }
  SelectionParams p;
  p.n_final = n_final;
  p.n_sup = std::min(available,
                     static_cast<size_t>(std::llround(sup_ratio * n_final)));
  p.n_unsup = std::min(available,
                       static_cast<size_t>(std::llround(unsup_ratio * n_final)));
  return p;
}

std::vector<CandidatePair> combine_selection(
    const std::vector<std::vector<CandidatePair>>& lists, size_t n_final) {
  std::vector<CandidatePair> out;
  PairSet seen;
  for (const auto& list : lists) {
    for (const auto& p : list) {
      if (out.size() >= n_final) return out;
      if (seen.insert(p).second) out.push_back(p);
    }
  }
  return out;
}

SelectionResult final_selection(const std::vector<ScoredPair>& scored,
                                const PairClassifier* voter,
                                const FeatureSource& features,
                                const SelectionParams& params) {
  if (params.n_sup > params.n_unsup || params.n_unsup > scored.size()) {
    throw Error("final_selection: need n_sup <= n_unsup <= scored pairs (" +
                std::to_string(params.n_sup) + ", " +
                std::to_string(params.n_unsup) + ", " +
                std::to_string(scored.size()) + ")");
  }
  auto head = [&](size_t n) {
    return std::vector<ScoredPair>(scored.begin(), scored.begin() + n);
  };
  SelectionResult result;
  if (params.use_supervised) {
    result.supervised = merge_inference(
        head(params.n_sup), MergeCondition::supervised(voter, params.alpha), features);
  }
  if (params.use_unsupervised) {
    result.unsupervised = merge_inference(
        head(params.n_unsup), MergeCondition::unsupervised(params.beta));
  }
  std::vector<CandidatePair> ranked;
  ranked.reserve(scored.size());
  for (const auto& sp : scored) ranked.push_back(sp.pair);
  result.submission = combine_selection(
      {result.supervised, result.unsupervised, ranked}, params.n_final);
  return result;
}

}  // namespace xdm

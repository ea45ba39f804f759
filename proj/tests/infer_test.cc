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
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

namespace xdm {
namespace {

std::vector<ScoredPair> ranked(const std::vector<CandidatePair>& pairs) {
  std::vector<ScoredPair> out;
  double s = 1.0;
  for (const auto& p : pairs) out.push_back({p, s -= 0.01});
  return out;
}

std::set<CandidatePair> as_set(const std::vector<CandidatePair>& v) {
  return {v.begin(), v.end()};
}

TEST(MergeInferenceTest, BlindHandTrace) {
  const auto in = ranked({{"a", "b"}, {"c", "d"}, {"b", "c"}});
  InferenceStats stats;
  const auto out = merge_inference(in, MergeCondition::blind(), {}, &stats);
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(out[0], CandidatePair("a", "b"));
  EXPECT_EQ(out[1], CandidatePair("c", "d"));
  EXPECT_EQ(as_set({out.begin() + 2, out.end()}),
            (std::set<CandidatePair>{{"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}}));
  EXPECT_EQ(stats.merges, 3u);
  EXPECT_EQ(stats.max_cluster_size, 4u);
}

TEST(MergeInferenceTest, SizeCapHandTrace) {
  const auto in = ranked({{"a", "b"}, {"c", "d"}, {"b", "c"}});
  InferenceStats stats;
  const auto out = merge_inference(in, MergeCondition::unsupervised(3), {}, &stats);
  EXPECT_EQ(out, (std::vector<CandidatePair>{{"a", "b"}, {"c", "d"}}));
  EXPECT_EQ(stats.rejected, 1u);
}

TEST(MergeInferenceTest, IntraClusterPairEmitsNothing) {
  const auto in = ranked({{"a", "b"}, {"b", "c"}, {"a", "c"}});
  const auto out = merge_inference(in, MergeCondition::blind());
  EXPECT_EQ(out.size(), 3u);
  EXPECT_EQ(as_set(out), (std::set<CandidatePair>{{"a", "b"}, {"a", "c"}, {"b", "c"}}));
}

TEST(MergeInferenceTest, RejectsUnsortedAndMissingVoter) {
  std::vector<ScoredPair> bad = {{{"a", "b"}, 0.1}, {{"c", "d"}, 0.9}};
  EXPECT_THROW(merge_inference(bad, MergeCondition::blind()), Error);
  const auto in = ranked({{"a", "b"}});
  EXPECT_THROW(merge_inference(in, MergeCondition::supervised(nullptr)), Error);
  PairClassifier voter;
  voter.schema = FeatureSchema({"f"});
  EXPECT_THROW(merge_inference(in, MergeCondition::supervised(&voter)), Error);
  EXPECT_THROW(MergeCondition::unsupervised(1).validate(), Error);
}

TEST(MergeInferenceTest, SupervisedUsesMeanVote) {
  // Zero-tree voter: every vote is sigmoid(base_score).
  PairClassifier voter;
  voter.schema = FeatureSchema({"f"});
  const FeatureSource feats = [](const CandidatePair&) { return FeatureVector{0.0}; };
  const auto in = ranked({{"a", "b"}, {"c", "d"}, {"b", "c"}});
  voter.base_score = 1.0;  // vote 0.73
  EXPECT_EQ(merge_inference(in, MergeCondition::supervised(&voter, 0.5), feats).size(), 6u);
  voter.base_score = -1.0;  // vote 0.27
  EXPECT_TRUE(merge_inference(in, MergeCondition::supervised(&voter, 0.5), feats).empty());
}

TEST(MergeInferenceTest, SupervisedVoteSeesCrossPairs) {
  // Vote is 1 only for pairs touching "a"; merging {a,b} with {c,d} averages
  // over (a,c),(a,d),(b,c),(b,d) = 0.5, which does not exceed alpha 0.5.
  PairClassifier voter;
  voter.schema = FeatureSchema({"f"});
  RegressionTree t;
  t.nodes = {{0, 0.5, 1, 2, 0.0, 1.0}, {-1, 0, -1, -1, -50.0, 0}, {-1, 0, -1, -1, 50.0, 0}};
  voter.trees.push_back(t);
  const FeatureSource feats = [](const CandidatePair& p) {
    return FeatureVector{p.a() == "a" ? 1.0 : 0.0};
  };
  const auto in = ranked({{"a", "b"}, {"c", "d"}, {"b", "c"}});
  const auto out = merge_inference(in, MergeCondition::supervised(&voter, 0.5), feats);
  EXPECT_EQ(out, (std::vector<CandidatePair>{{"a", "b"}}));
}

// Brute-force oracle: connected components by repeated relaxation.
std::set<CandidatePair> closure(const std::vector<CandidatePair>& edges) {
  std::map<UserId, UserId> label;
  for (const auto& e : edges) {
    label.emplace(e.a(), e.a());
    label.emplace(e.b(), e.b());
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& e : edges) {
      const auto m = std::min(label[e.a()], label[e.b()]);
      if (label[e.a()] != m || label[e.b()] != m) {
        label[e.a()] = label[e.b()] = m;
        changed = true;
      }
    }
  }
  std::set<CandidatePair> out;
  for (const auto& [u, lu] : label) {
    for (const auto& [v, lv] : label) {
      if (u < v && lu == lv) out.insert({u, v});
    }
  }
  return out;
}

std::vector<CandidatePair> random_edges(std::mt19937_64& rng, int users, int edges) {
  std::vector<CandidatePair> out;
  while (static_cast<int>(out.size()) < edges) {
    const int a = rng() % users, b = rng() % users;
    if (a != b) out.push_back({"u" + std::to_string(a), "u" + std::to_string(b)});
  }
  return out;
}

TEST(MergeInferenceTest, BlindEqualsTransitiveClosure) {
  std::mt19937_64 rng(11);
  for (int run = 0; run < 100; ++run) {
    const int users = 2 + static_cast<int>(rng() % 49);
    const int edges = 1 + static_cast<int>(rng() % (2 * users));
    const auto e = random_edges(rng, users, edges);
    const auto out = merge_inference(ranked(e), MergeCondition::blind());
    EXPECT_EQ(as_set(out), closure(e)) << "run " << run;
    EXPECT_EQ(as_set(out).size(), out.size()) << "duplicate emission in run " << run;
  }
}

TEST(MergeInferenceTest, ClustersNeverExceedBeta) {
  std::mt19937_64 rng(12);
  for (int run = 0; run < 100; ++run) {
    const auto e = random_edges(rng, 40, 120);
    InferenceStats stats;
    const auto out = merge_inference(ranked(e), MergeCondition::unsupervised(5), {}, &stats);
    EXPECT_LE(stats.max_cluster_size, 5u);
    // Components of the emitted pairs are the clusters.
    std::map<UserId, int> degree;
    for (const auto& p : out) {
      ++degree[p.a()];
      ++degree[p.b()];
    }
    for (const auto& [u, d] : degree) EXPECT_LE(d, 4);
  }
}

TEST(VoterTest, TrainsOnExtendedPairs) {
  // Two true personas {a,b,c} and {d,e}; one wrong pair (c,d) ranks last.
  const auto in = ranked({{"a", "b"}, {"b", "c"}, {"d", "e"}, {"c", "d"}});
  const PairSet truth = {{"a", "b"}, {"a", "c"}, {"b", "c"}, {"d", "e"}};
  const FeatureSource feats = [](const CandidatePair& p) {
    const bool left = p.a() <= "c", right = p.b() <= "c";
    return FeatureVector{left == right ? 1.0 : 0.0};
  };
  GbdtParams params;
  params.n_trees = 5;
  params.min_leaf = 1;
  const auto vt = train_voter(in, truth, feats, FeatureSchema({"same_side"}), params);
  EXPECT_EQ(vt.data.size(), 10u);  // all pairs of the 5-user component
  EXPECT_GE(vt.data.size(), in.size());
  int positives = 0;
  for (const auto& lp : vt.data) positives += lp.label;
  EXPECT_EQ(positives, 4);
  EXPECT_EQ(vt.voter.schema, FeatureSchema({"same_side"}));
  const std::vector<double> same = {1.0}, cross = {0.0};
  EXPECT_GT(vt.voter.predict(same), vt.voter.predict(cross));
}

TEST(SelectionTest, CombineHandTrace) {
  const std::vector<CandidatePair> l1 = {{"a", "b"}, {"c", "d"}};
  const std::vector<CandidatePair> l2 = {{"a", "b"}, {"e", "f"}};
  const std::vector<CandidatePair> l3 = {{"g", "h"}};
  EXPECT_EQ(combine_selection({l1, l2, l3}, 3),
            (std::vector<CandidatePair>{{"a", "b"}, {"c", "d"}, {"e", "f"}}));
  EXPECT_EQ(combine_selection({l1, l2, l3}, 100).size(), 4u);
  EXPECT_TRUE(combine_selection({l1}, 0).empty());
}

TEST(SelectionTest, BudgetRatios) {
  const auto p = SelectionParams::from_budget(120000, 1000000);
  EXPECT_EQ(p.n_final, 120000u);
  EXPECT_EQ(p.n_sup, 45000u);
  EXPECT_EQ(p.n_unsup, 80040u);
  const auto capped = SelectionParams::from_budget(100, 30);
  EXPECT_LE(capped.n_final, 100u);
  EXPECT_LE(capped.n_unsup, 30u);
  EXPECT_LE(capped.n_sup, capped.n_unsup);
}

TEST(SelectionTest, FinalSelectionLayers) {
  const auto scored = ranked({{"a", "b"}, {"c", "d"}, {"b", "c"}, {"e", "f"}, {"g", "h"}});
  SelectionParams p;
  p.n_sup = 2;
  p.n_unsup = 3;
  p.n_final = 5;
  p.use_supervised = false;
  p.beta = 5;
  const auto r = final_selection(scored, nullptr, {}, p);
  EXPECT_TRUE(r.supervised.empty());
  EXPECT_EQ(r.unsupervised.size(), 6u);  // top 3 pairs close into {a,b,c,d}
  ASSERT_EQ(r.submission.size(), 5u);
  EXPECT_EQ(as_set(r.submission).size(), 5u);
  EXPECT_EQ(r.submission[0], CandidatePair("a", "b"));
  // Unsupervised list first, then the sorted pairs fill the remainder.
  EXPECT_EQ(as_set({r.submission.begin(), r.submission.end()}).count({"e", "f"}), 0u);
  p.n_sup = 4;
  EXPECT_THROW(final_selection(scored, nullptr, {}, p), Error);
}

TEST(ClusterStateTest, MembersInMergeOrder) {
  ClusterState cs;
  const auto a = cs.add("a"), b = cs.add("b"), c = cs.add("c");
  EXPECT_EQ(cs.add("a"), a);
  const auto r1 = cs.merge(cs.find(a), cs.find(b));
  const auto r2 = cs.merge(cs.find(c), r1);
  EXPECT_EQ(cs.size_of(r2), 3u);
  EXPECT_EQ(cs.find("a"), cs.find("c"));
  EXPECT_EQ(cs.user_count(), 3u);
}

}  // namespace
}  // namespace xdm

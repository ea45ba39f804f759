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

#include "xdevmatch/classify.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

namespace xdm {
namespace {

std::string uid(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%03d", i);
  return buf;
}

TEST(SampleTest, DefinitionExample) {
  const std::set<CandidatePair> cands = {{"u1", "u2"}, {"u1", "u3"}};
  const auto s = sample_training_pairs({"u1", "u2", "u3"}, cands, PairSet{{"u1", "u2"}}, 5, 1);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].pair, CandidatePair("u1", "u2"));
  EXPECT_EQ(s[0].label, 1);
  EXPECT_TRUE(s[0].in_candidates);
  EXPECT_EQ(s[1].pair, CandidatePair("u1", "u3"));
  EXPECT_EQ(s[1].label, 0);
}

TEST(SampleTest, NegativeCapAndDeterminism) {
  std::vector<UserId> users;
  for (int i = 0; i < 60; ++i) users.push_back(uid(i));
  PairSet truth;
  std::set<CandidatePair> cands;
  for (int i = 0; i < 10; ++i) truth.insert({uid(2 * i), uid(2 * i + 1)});
  for (int i = 20; i < 40 && cands.size() < 200; ++i) {
    for (int j = i + 1; j < 60 && cands.size() < 200; ++j) cands.insert({uid(i), uid(j)});
  }
  ASSERT_EQ(cands.size(), 200u);
  const auto s = sample_training_pairs(users, cands, truth, 5, 3);
  EXPECT_EQ(std::count_if(s.begin(), s.end(), [](auto& p) { return p.label == 1; }), 10);
  EXPECT_EQ(std::count_if(s.begin(), s.end(), [](auto& p) { return p.label == 0; }), 50);
  // Truth pairs outside the candidates are kept and flagged.
  EXPECT_TRUE(std::none_of(s.begin(), s.end(),
                           [](auto& p) { return p.label == 1 && p.in_candidates; }));
  const auto again = sample_training_pairs(users, cands, truth, 5, 3);
  ASSERT_EQ(again.size(), s.size());
  for (size_t i = 0; i < s.size(); ++i) EXPECT_EQ(again[i].pair, s[i].pair);
  EXPECT_THROW(sample_training_pairs(users, cands, PairSet{}, 5, 3), Error);
}

FeatureSchema schema_of(size_t n) {
  std::vector<std::string> names;
  for (size_t i = 0; i < n; ++i) names.push_back("f" + std::to_string(i));
  return FeatureSchema(names);
}

TEST(GbdtTest, SeparableOneFeature) {
  std::vector<FeatureVector> rows;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    rows.push_back({0.0});
    labels.push_back(0);
    rows.push_back({1.0});
    labels.push_back(1);
  }
  GbdtParams p;
  p.n_trees = 20;
  const auto clf = train_gbdt(rows, labels, schema_of(1), p);
  const std::vector<double> one = {1.0}, zero = {0.0};
  EXPECT_GT(clf.predict(one), clf.predict(zero));
  EXPECT_GT(clf.predict(one), 0.9);
}

TEST(GbdtTest, PreconditionErrors) {
  GbdtParams p;
  EXPECT_THROW(train_gbdt({{1.0}, {2.0}}, {1, 1}, schema_of(1), p), Error);
  EXPECT_THROW(train_gbdt({}, {}, schema_of(1), p), Error);
  EXPECT_THROW(train_gbdt({{NAN}, {2.0}}, {0, 1}, schema_of(1), p), Error);
  EXPECT_THROW(train_gbdt({{1.0, 2.0}, {2.0}}, {0, 1}, schema_of(2), p), Error);
  p.max_depth = 0;
  EXPECT_THROW(p.validate(), Error);
}

struct Data {
  std::vector<FeatureVector> rows;
  std::vector<int> labels;
};

// Label depends on f0 only (through a noisy threshold); f1..f(d-1) are noise.
Data planted(uint64_t seed, size_t n, size_t dims, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Data d;
  for (size_t i = 0; i < n; ++i) {
    FeatureVector x(dims);
    for (auto& v : x) v = g(rng);
    d.rows.push_back(x);
    d.labels.push_back(x[0] + noise * g(rng) > 0.3 ? 1 : 0);
  }
  return d;
}

TEST(GbdtTest, LoglossNonIncreasingOnRandomData) {
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u;
    Data d;
    for (int i = 0; i < 300; ++i) {
      d.rows.push_back({u(rng), u(rng), u(rng)});
      d.labels.push_back(u(rng) < 0.4);
    }
    GbdtParams p;
    p.n_trees = 30;
    p.min_leaf = 5;
    const auto clf = train_gbdt(d.rows, d.labels, schema_of(3), p);
    const auto& losses = clf.telemetry.round_logloss;
    ASSERT_EQ(losses.size(), 30u);
    EXPECT_LE(losses.front(), clf.telemetry.initial_logloss + 1e-12);
    for (size_t t = 1; t < losses.size(); ++t) {
      EXPECT_LE(losses[t], losses[t - 1] + 1e-12) << "seed " << seed << " round " << t;
    }
  }
}

TEST(GbdtTest, PlantedSignalAucAndImportance) {
  std::vector<double> aucs;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const auto train = planted(seed, 600, 5, 0.5);
    const auto test = planted(seed + 1000, 400, 5, 0.5);
    GbdtParams p;
    p.n_trees = 50;
    p.seed = seed;
    const auto clf = train_gbdt(train.rows, train.labels, schema_of(5), p);
    std::vector<double> scores;
    for (const auto& x : test.rows) scores.push_back(clf.predict(x));
    aucs.push_back(roc_auc(scores, test.labels));
    const auto imp = feature_importance(clf);
    const auto best = std::max_element(imp.begin(), imp.end(), [](auto& a, auto& b) {
      return a.second < b.second;
    });
    EXPECT_EQ(best->first, "f0");
    double sum = 0.0;
    for (const auto& [name, gain] : imp) {
      EXPECT_GE(gain, 0.0);
      sum += gain;
    }
    EXPECT_NEAR(sum, clf.telemetry.total_gain, 1e-9 * std::max(1.0, sum));
  }
  std::sort(aucs.begin(), aucs.end());
  EXPECT_GT((aucs[4] + aucs[5]) / 2, 0.7);
}

TEST(GbdtTest, SubsampleIsSeeded) {
  const auto d = planted(5, 200, 3, 0.5);
  GbdtParams p;
  p.n_trees = 10;
  p.subsample = 0.5;
  p.seed = 9;
  const auto a = train_gbdt(d.rows, d.labels, schema_of(3), p);
  const auto b = train_gbdt(d.rows, d.labels, schema_of(3), p);
  std::stringstream sa, sb;
  write_classifier_artifact(sa, a);
  write_classifier_artifact(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(ScoreTest, ZeroTreesGiveBaseScore) {
  PairClassifier clf;
  clf.schema = schema_of(2);
  clf.base_score = 0.4;
  const std::vector<CandidatePair> pairs = {{"a", "b"}, {"c", "d"}, {"a", "c"}};
  const auto scored = score_pairs(clf, clf.schema, pairs, {{1, 2}, {3, 4}, {5, 6}});
  ASSERT_EQ(scored.size(), 3u);
  for (const auto& s : scored) EXPECT_DOUBLE_EQ(s.score, 1.0 / (1.0 + std::exp(-0.4)));
  // Equal scores fall back to canonical pair order.
  EXPECT_EQ(scored[0].pair, CandidatePair("a", "b"));
  EXPECT_EQ(scored[1].pair, CandidatePair("a", "c"));
  EXPECT_EQ(scored[2].pair, CandidatePair("c", "d"));
  for (const auto& [n, g] : feature_importance(clf)) EXPECT_EQ(g, 0.0);
  EXPECT_THROW(score_pairs(clf, schema_of(3), pairs, {{1, 2, 3}, {3, 4, 5}, {5, 6, 7}}),
               Error);
}

TEST(ScoreTest, SortedPermutation) {
  const auto d = planted(2, 300, 3, 0.3);
  GbdtParams p;
  p.n_trees = 15;
  const auto clf = train_gbdt(d.rows, d.labels, schema_of(3), p);
  std::vector<CandidatePair> pairs;
  for (size_t i = 0; i < d.rows.size(); ++i) pairs.push_back({uid(i), "z"});
  const auto scored = score_pairs(clf, clf.schema, pairs, d.rows);
  ASSERT_EQ(scored.size(), pairs.size());
  std::set<CandidatePair> seen;
  for (size_t i = 0; i < scored.size(); ++i) {
    seen.insert(scored[i].pair);
    if (i > 0) EXPECT_GE(scored[i - 1].score, scored[i].score);
  }
  EXPECT_EQ(seen.size(), pairs.size());
}

TEST(AucTest, AgreesWithReferenceValues) {
  // Reference values from sklearn.metrics.roc_auc_score.
  const std::vector<double> s1 = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> l1 = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s1, l1), 0.75);
  const std::vector<double> s2 = {0.5, 0.5, 0.2, 0.9};
  const std::vector<int> l2 = {1, 0, 0, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s2, l2), 0.875);
}

TEST(ClassifierArtifactTest, BitIdenticalRoundTrip) {
  const auto d = planted(4, 200, 4, 0.5);
  GbdtParams p;
  p.n_trees = 12;
  const auto clf = train_gbdt(d.rows, d.labels, schema_of(4), p);
  std::stringstream ss;
  write_classifier_artifact(ss, clf);
  const auto back = read_classifier_artifact(ss);
  EXPECT_EQ(back.schema, clf.schema);
  EXPECT_EQ(back.trees.size(), clf.trees.size());
  for (const auto& x : d.rows) EXPECT_EQ(back.predict(x), clf.predict(x));
  std::stringstream again;
  write_classifier_artifact(again, back);
  EXPECT_EQ(again.str(), ss.str());
}

TEST(ScoredPairsFileTest, RoundTrip) {
  const std::vector<ScoredPair> pairs = {{{"a", "b"}, 0.1 + 0.2}, {{"b", "c"}, 1e-300}};
  std::stringstream ss;
  write_scored_pairs(ss, pairs);
  const auto back = read_scored_pairs(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pair, pairs[0].pair);
  EXPECT_EQ(back[0].score, pairs[0].score);
  EXPECT_EQ(back[1].score, pairs[1].score);
}

}  // namespace
}  // namespace xdm

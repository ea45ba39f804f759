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

#include <sstream>

#include <gtest/gtest.h>

namespace xdm {
namespace {

TEST(F1Test, FourPlaceInputs) {
  // Precision and recall given to four places, so the harmonic
  // mean (0.42030) lands within rounding of 0.4204.
  EXPECT_NEAR(f1_score(0.3986, 0.4445), 0.4204, 2e-4);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(f1_score(0.3, 0.3), 0.3);
}

TEST(ScoreSubmissionTest, HandArithmetic) {
  const auto r = score_submission({{"a", "b"}, {"c", "d"}}, PairSet{{"a", "b"}}, 2);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.true_positives, 1);
  EXPECT_EQ(r.predicted, 2);
  EXPECT_FALSE(r.clamped);
}

TEST(ScoreSubmissionTest, IdentityAndOrderInsensitivePairs) {
  const PairSet truth = {{"a", "b"}, {"c", "d"}};
  const auto r = score_submission({{"b", "a"}, {"d", "c"}}, truth, 2);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(ScoreSubmissionTest, ClampingAndErrors) {
  const PairSet truth = {{"a", "b"}, {"c", "d"}};
  const auto r = score_submission({{"a", "b"}}, truth, 10);
  EXPECT_TRUE(r.clamped);
  EXPECT_EQ(r.k, 10);
  EXPECT_EQ(r.predicted, 1);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 0.5);
  EXPECT_THROW(score_submission({{"a", "b"}}, PairSet{}, 1), Error);
  EXPECT_THROW(score_submission({{"a", "b"}}, truth, -1), Error);
  EXPECT_THROW(score_submission({{"a", "b"}, {"b", "a"}}, truth, 2), Error);
  const auto zero = score_submission({{"a", "b"}}, truth, 0);
  EXPECT_EQ(zero.predicted, 0);
  EXPECT_EQ(zero.f1, 0.0);
}

TEST(F1CurveTest, MatchesPointwiseAndIsMonotoneInRecall) {
  const PairSet truth = {{"a", "b"}, {"c", "d"}, {"e", "f"}};
  const std::vector<CandidatePair> pred = {{"a", "b"}, {"x", "y"}, {"c", "d"}, {"e", "f"}};
  const std::vector<int64_t> ks = {1, 2, 3, 4, 6};
  const auto curve = f1_curve(pred, truth, ks);
  ASSERT_EQ(curve.size(), ks.size());
  for (size_t i = 0; i < ks.size(); ++i) {
    const auto p = score_submission(pred, truth, ks[i]);
    EXPECT_EQ(curve[i].f1, p.f1);
    EXPECT_EQ(curve[i].true_positives, p.true_positives);
    if (i > 0) EXPECT_GE(curve[i].recall, curve[i - 1].recall);
  }
  EXPECT_TRUE(curve.back().clamped);
  EXPECT_THROW(f1_curve(pred, truth, {2, 1}), Error);
  EXPECT_THROW(f1_curve(pred, truth, {0, 1}), Error);
}

TEST(EvalOutputTest, LinesAndBlock) {
  const auto r = score_submission({{"a", "b"}, {"c", "d"}}, PairSet{{"a", "b"}}, 2);
  std::ostringstream lines, block;
  write_eval_lines(lines, {r});
  write_eval_block(block, r);
  EXPECT_EQ(lines.str(), "2 0.5 1 0.666667 1\n");
  EXPECT_NE(block.str().find("f1="), std::string::npos);
  EXPECT_NE(block.str().find("true_positives=1"), std::string::npos);
}

}  // namespace
}  // namespace xdm

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

#include "xdevmatch/common.h"

#include <atomic>
#include <sstream>

#include <gtest/gtest.h>

namespace xdm {
namespace {

TEST(CandidatePairTest, CanonicalOrder) {
  const CandidatePair p("zed", "amy");
  EXPECT_EQ(p.a(), "amy");
  EXPECT_EQ(p.b(), "zed");
  EXPECT_EQ(p, CandidatePair("amy", "zed"));
}

TEST(CandidatePairTest, SelfPairRejected) {
  EXPECT_THROW(CandidatePair("u1", "u1"), Error);
}

TEST(CandidatePairTest, HashAgreesWithEquality) {
  PairSet set;
  set.insert(CandidatePair("b", "a"));
  set.insert(CandidatePair("a", "b"));
  EXPECT_EQ(set.size(), 1u);
}

TEST(PairsFileTest, RoundTrip) {
  const std::vector<CandidatePair> pairs = {{"u2", "u1"}, {"u3", "u4"}};
  std::stringstream ss;
  write_pairs(ss, pairs);
  EXPECT_EQ(ss.str(), "u1,u2\nu3,u4\n");
  EXPECT_EQ(read_pairs(ss), pairs);
}

TEST(PairsFileTest, ReadCanonicalizes) {
  std::istringstream in("b,a\r\n\nc,d\n");
  const auto pairs = read_pairs(in);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], CandidatePair("a", "b"));
}

TEST(PairsFileTest, MalformedLineNamesLine) {
  std::istringstream in("a,b\nbad line\n");
  try {
    read_pairs(in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(RestrictPairsTest, KeepsPairsInsidePopulation) {
  const std::vector<CandidatePair> pairs = {{"a", "b"}, {"b", "c"}, {"c", "d"}};
  const auto kept = restrict_pairs(pairs, [](const UserId& u) { return u != "c"; });
  EXPECT_EQ(kept.size(), 1u);
  EXPECT_TRUE(kept.count(CandidatePair("a", "b")));
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  for (const int workers : {1, 3}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), workers, [&](size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelForTest, RethrowsWorkerError) {
  EXPECT_THROW(parallel_for(10, 2,
                            [](size_t i) {
                              if (i == 7) throw Error("boom");
                            }),
               Error);
}

}  // namespace
}  // namespace xdm

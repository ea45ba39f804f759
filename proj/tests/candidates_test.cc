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

#include "xdevmatch/candidates.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

namespace xdm {
namespace {

EmbeddingModel dense_model(const std::map<UserId, std::vector<float>>& rows) {
  EmbeddingModel m;
  m.config.dim = static_cast<int>(rows.begin()->second.size());
  for (const auto& [u, v] : rows) {
    m.users.push_back(u);
    m.user_matrix.insert(m.user_matrix.end(), v.begin(), v.end());
  }
  return m;
}

SparseVector sparse(std::vector<std::pair<uint32_t, double>> entries) {
  SparseVector v;
  for (const auto& [i, w] : entries) v.entries.push_back({i, w});
  return v;
}

std::vector<UserId> ids(const NeighborList& list) {
  std::vector<UserId> out;
  for (const auto& n : list.neighbors) out.push_back(n.user);
  return out;
}

TEST(KnnTest, NearestOfThreeUsers) {
  const auto m = dense_model({{"A", {1, 0}}, {"B", {0.9f, 0.1f}}, {"C", {0, 1}}});
  const auto res = knn_dense(m, {"A"}, 1);
  EXPECT_EQ(ids(res.at("A")), std::vector<UserId>{"B"});
  EXPECT_EQ(ids(knn_dense(m, {"A"}, 10).at("A")), (std::vector<UserId>{"B", "C"}));
}

TEST(KnnTest, TiesGoToSmallerId) {
  const auto m = dense_model({{"A", {1, 0}}, {"C", {1, 1}}, {"B", {1, 1}}});
  EXPECT_EQ(ids(knn_dense(m, {"A"}, 1).at("A")), std::vector<UserId>{"B"});
  SparseVectors sv{{"A", sparse({{0, 1}})},
                   {"C", sparse({{0, 1}, {1, 1}})},
                   {"B", sparse({{0, 1}, {1, 1}})}};
  EXPECT_EQ(ids(knn_sparse(sv, {"A"}, 1).at("A")), std::vector<UserId>{"B"});
}

TEST(KnnTest, ZeroQueryListsEveryoneAtZeroById) {
  const auto m = dense_model({{"d", {1, 2}}, {"a", {0, 0}}, {"c", {3, 1}}, {"b", {-1, 0}}});
  const auto list = knn_dense(m, {"a"}, 3).at("a");
  EXPECT_EQ(ids(list), (std::vector<UserId>{"b", "c", "d"}));
  for (const auto& n : list.neighbors) EXPECT_EQ(n.similarity, 0.0);
  SparseVectors sv{{"a", SparseVector{}}, {"b", sparse({{3, 1}})}, {"c", sparse({{1, 2}})}};
  EXPECT_EQ(ids(knn_sparse(sv, {"a"}, 5).at("a")), (std::vector<UserId>{"b", "c"}));
}

TEST(KnnTest, PopulationRestrictsSearch) {
  const auto m = dense_model({{"A", {1, 0}}, {"B", {0.9f, 0.1f}}, {"C", {0.5f, 0.5f}}});
  EXPECT_EQ(ids(knn_dense(m, {"A"}, 2, {"A", "C"}).at("A")), std::vector<UserId>{"C"});
  EXPECT_THROW(knn_dense(m, {"A"}, 2, {"A", "Z"}), Error);
  EXPECT_THROW(knn_dense(m, {"A"}, 0), Error);
}

// Brute-force oracle: long double cosine, full sort with the id tie rule.
struct Instance {
  std::vector<UserId> users;
  std::vector<std::vector<double>> rows;
};

Instance random_instance(uint64_t seed, size_t n, size_t dim, bool sparse_rows) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::bernoulli_distribution keep(0.3);
  Instance inst;
  for (size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "u%03zu", (i * 37) % n);
    inst.users.push_back(id);
    std::vector<double> row(dim, 0.0);
    if (i % 10 == 9) {
      row = inst.rows[i - 1];  // planted exact duplicate
    } else {
      for (auto& x : row) {
        if (!sparse_rows || keep(rng)) x = sparse_rows ? std::abs(w(rng)) : w(rng);
      }
      // One-entry rows on a shared index are parallel: a real tie that
      // rounding may break either way. Keep those off the instance.
      if (std::count(row.begin(), row.end(), 0.0) == static_cast<long>(dim) - 1) {
        for (auto& x : row) {
          if (x == 0.0) {
            x = 0.5;
            break;
          }
        }
      }
    }
    inst.rows.push_back(row);
  }
  return inst;
}

std::map<UserId, std::vector<UserId>> oracle(const Instance& inst, size_t k) {
  std::map<UserId, std::vector<UserId>> out;
  for (size_t q = 0; q < inst.users.size(); ++q) {
    std::vector<std::pair<long double, UserId>> all;
    for (size_t j = 0; j < inst.users.size(); ++j) {
      if (j == q) continue;
      long double d = 0, nq = 0, nj = 0;
      for (size_t t = 0; t < inst.rows[q].size(); ++t) {
        d += static_cast<long double>(inst.rows[q][t]) * inst.rows[j][t];
        nq += static_cast<long double>(inst.rows[q][t]) * inst.rows[q][t];
        nj += static_cast<long double>(inst.rows[j][t]) * inst.rows[j][t];
      }
      const long double c = (nq == 0 || nj == 0) ? 0 : d / std::sqrt(nq * nj);
      all.emplace_back(c, inst.users[j]);
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    auto& ids_q = out[inst.users[q]];
    for (size_t i = 0; i < std::min(k, all.size()); ++i) ids_q.push_back(all[i].second);
  }
  return out;
}

TEST(KnnOracleTest, DenseMatchesBruteForce) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = random_instance(seed, 50, 6, false);
    std::map<UserId, std::vector<float>> rows;
    for (size_t i = 0; i < inst.users.size(); ++i) {
      std::vector<float> f(inst.rows[i].begin(), inst.rows[i].end());
      for (size_t t = 0; t < f.size(); ++t) inst.rows[i][t] = f[t];  // oracle sees floats
      rows[inst.users[i]] = f;
    }
    const auto m = dense_model(rows);
    const auto got = knn_dense(m, inst.users, 7, {}, 1 + seed % 3);
    const auto want = oracle(inst, 7);
    for (const auto& u : inst.users) {
      EXPECT_EQ(ids(got.at(u)), want.at(u)) << "seed " << seed << " user " << u;
      for (const auto& n : got.at(u).neighbors) {
        EXPECT_GE(n.similarity, -1.0);
        EXPECT_LE(n.similarity, 1.0);
        EXPECT_NE(n.user, u);
      }
    }
  }
}

TEST(KnnOracleTest, SparseMatchesBruteForce) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = random_instance(seed + 100, 50, 12, true);
    SparseVectors sv;
    for (size_t i = 0; i < inst.users.size(); ++i) {
      SparseVector v;
      for (size_t t = 0; t < inst.rows[i].size(); ++t) {
        if (inst.rows[i][t] != 0) v.entries.push_back({static_cast<uint32_t>(t), inst.rows[i][t]});
      }
      sv[inst.users[i]] = v;
    }
    const auto got = knn_sparse(sv, inst.users, 7, {}, 1 + seed % 3);
    const auto want = oracle(inst, 7);
    for (const auto& u : inst.users) {
      EXPECT_EQ(ids(got.at(u)), want.at(u)) << "seed " << seed << " user " << u;
    }
  }
}

NeighborMap map_of(std::map<UserId, std::vector<UserId>> lists) {
  NeighborMap m;
  for (auto& [q, ns] : lists) {
    NeighborList l{q, {}};
    double s = 1.0;
    for (auto& n : ns) l.neighbors.push_back({n, s -= 0.1});
    m[q] = l;
  }
  return m;
}

TEST(UnionTest, UnionAndCanonicalization) {
  const auto m1 = map_of({{"a", {"b"}}});
  const auto m2 = map_of({{"a", {"c"}}});
  EXPECT_EQ(union_candidates({&m1, &m2}),
            (std::set<CandidatePair>{{"a", "b"}, {"a", "c"}}));
  const auto m3 = map_of({{"a", {"b"}}, {"b", {"a"}}});
  EXPECT_EQ(union_candidates({&m3}).size(), 1u);
  EXPECT_TRUE(union_candidates({}).empty());
  EXPECT_EQ(union_candidates({&m2, &m1}), union_candidates({&m1, &m2}));
}

TEST(UnionTest, TruncatesAtK) {
  const auto m = map_of({{"a", {"b", "c", "d"}}});
  EXPECT_EQ(union_candidates({&m}, 2).size(), 2u);
  EXPECT_EQ(union_candidates({&m}, 0).size(), 3u);
}

TEST(RecallTest, SimpleCases) {
  const auto m = map_of({{"u1", {"u2"}}, {"u2", {"u3"}}});
  EXPECT_EQ(recall_at_k({&m}, PairSet{{"u1", "u2"}}, {1}).front().second, 1.0);
  EXPECT_EQ(recall_at_k({&m}, PairSet{{"u1", "u4"}}, {1}).front().second, 0.0);
  EXPECT_THROW(recall_at_k({&m}, PairSet{}, {1}), Error);
}

TEST(RecallTest, MatchesDirectScanAndIsMonotone) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = random_instance(seed + 200, 60, 5, false);
    std::map<UserId, std::vector<float>> rows;
    for (size_t i = 0; i < inst.users.size(); ++i) {
      rows[inst.users[i]] = std::vector<float>(inst.rows[i].begin(), inst.rows[i].end());
    }
    const auto m = dense_model(rows);
    const auto nm = knn_dense(m, inst.users, 20);
    std::mt19937_64 rng(seed);
    PairSet truth;
    while (truth.size() < 40) {
      const auto a = inst.users[rng() % inst.users.size()];
      const auto b = inst.users[rng() % inst.users.size()];
      if (a != b) truth.insert({a, b});
    }
    const std::vector<int> ks = {1, 2, 5, 10, 20};
    const auto curve = recall_at_k({&nm}, truth, ks);
    ASSERT_EQ(curve.size(), ks.size());
    for (size_t i = 0; i < ks.size(); ++i) {
      size_t hit = 0;
      for (const auto& p : truth) {
        const auto in_top = [&](const UserId& q, const UserId& x) {
          const auto& ns = nm.at(q).neighbors;
          for (int j = 0; j < ks[i] && j < static_cast<int>(ns.size()); ++j) {
            if (ns[j].user == x) return true;
          }
          return false;
        };
        hit += in_top(p.a(), p.b()) || in_top(p.b(), p.a());
      }
      EXPECT_EQ(curve[i].first, ks[i]);
      EXPECT_DOUBLE_EQ(curve[i].second, static_cast<double>(hit) / truth.size());
      if (i > 0) EXPECT_GE(curve[i].second, curve[i - 1].second);
    }
  }
}

TEST(NeighborArtifactTest, RoundTrip) {
  NeighborBundle b;
  b.k = 2;
  b.names = {"x", "y"};
  b.maps = {map_of({{"a", {"b", "c"}}}), map_of({{"b", {"a"}}})};
  std::stringstream ss;
  write_neighbor_artifact(ss, b);
  const auto back = read_neighbor_artifact(ss);
  EXPECT_EQ(back.k, 2);
  EXPECT_EQ(back.names, b.names);
  EXPECT_EQ(back.maps, b.maps);
}

}  // namespace
}  // namespace xdm

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

// Exact cosine k-nearest-neighbor search over sparse and dense user
// representations, candidate-pair union and recall measurement.

#ifndef XDEVMATCH_CANDIDATES_H_
#define XDEVMATCH_CANDIDATES_H_

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "xdevmatch/common.h"
#include "xdevmatch/embed.h"
#include "xdevmatch/vectorize.h"

namespace xdm {

// Cosine similarity, 0 when either side is the zero vector, clamped to
// [-1, 1] against rounding.
double cosine(std::span<const float> x, std::span<const float> y);
double cosine(const SparseVector& x, const SparseVector& y);

struct Neighbor {
  UserId user;
  double similarity = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Descending similarity, ties broken by ascending user id; never contains
// the query itself.
struct NeighborList {
  UserId query;
  std::vector<Neighbor> neighbors;
  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

using NeighborMap = std::map<UserId, NeighborList>;

// Searches `population` (every user in `vectors` when empty). Raises Error
// when k < 1 or a query or population member has no vector.
NeighborMap knn_sparse(const SparseVectors& vectors,
                       const std::vector<UserId>& queries, int k,
                       const std::vector<UserId>& population = {},
                       int workers = 1);

// Dense counterpart of knn_sparse.
NeighborMap knn_dense(const EmbeddingModel& model,
                      const std::vector<UserId>& queries, int k,
                      const std::vector<UserId>& population = {},
                      int workers = 1);

// Canonical pairs {a, b} where b is among the first k entries of a's list in
// any map, or vice versa. k <= 0 means "use whole lists".
std::set<CandidatePair> union_candidates(
    const std::vector<const NeighborMap*>& maps, int k = 18);

// Recall of the truth pairs by union_candidates at each k. Maps must have
// been built with at least max(ks) neighbors. Raises Error on empty truth.
std::vector<std::pair<int, double>> recall_at_k(
    const std::vector<const NeighborMap*>& maps, const PairSet& truth,
    const std::vector<int>& ks);

void write_recall_report(std::ostream& out,
                         const std::vector<std::pair<int, double>>& curve);

// Neighbor-map bundle artifact: named maps sharing one k.
struct NeighborBundle {
  int k = 0;
  std::vector<std::string> names;
  std::vector<NeighborMap> maps;

  std::vector<const NeighborMap*> pointers() const;
};

void write_neighbor_artifact(std::ostream& out, const NeighborBundle& bundle);
NeighborBundle read_neighbor_artifact(std::istream& in);

}  // namespace xdm

#endif  // XDEVMATCH_CANDIDATES_H_

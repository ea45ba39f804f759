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
#include <ostream>

#include "xdevmatch/binio.h"

namespace xdm {
namespace {

constexpr char kNeighborMagic[] = "XDNB";
constexpr uint32_t kNeighborVersion = 1;

double cosine_from(double dot, double nx, double ny) {
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::clamp(dot / (nx * ny), -1.0, 1.0);
}

std::vector<UserId> sorted_population(const std::vector<UserId>& population,
                                      std::vector<UserId> fallback) {
  std::vector<UserId> pop = population.empty() ? std::move(fallback) : population;
  std::sort(pop.begin(), pop.end());
  pop.erase(std::unique(pop.begin(), pop.end()), pop.end());
  return pop;
}

struct Scored {
  double sim;
  size_t idx;  // index into the sorted population, so idx order is id order
};

bool ranks_before(const Scored& x, const Scored& y) {
  if (x.sim != y.sim) return x.sim > y.sim;
  return x.idx < y.idx;
}

NeighborList top_k(const UserId& query, std::vector<Scored> scored, int k,
                   const std::vector<UserId>& pop) {
  const size_t keep = std::min(scored.size(), static_cast<size_t>(k));
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    ranks_before);
  NeighborList list{query, {}};
  list.neighbors.reserve(keep);
  for (size_t i = 0; i < keep; ++i) {
    list.neighbors.push_back({pop[scored[i].idx], scored[i].sim});
  }
  return list;
}

std::vector<UserId> keys_of(const SparseVectors& vectors) {
  std::vector<UserId> keys;
  keys.reserve(vectors.size());
  for (const auto& [user, v] : vectors) keys.push_back(user);
  return keys;
}

}  // namespace

double cosine(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) throw Error("cosine: dimension mismatch");
  double d = 0.0, nx = 0.0, ny = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    d += static_cast<double>(x[i]) * y[i];
    nx += static_cast<double>(x[i]) * x[i];
    ny += static_cast<double>(y[i]) * y[i];
  }
  return cosine_from(d, std::sqrt(nx), std::sqrt(ny));
}

double cosine(const SparseVector& x, const SparseVector& y) {
  return cosine_from(dot(x, y), norm(x), norm(y));
}

NeighborMap knn_sparse(const SparseVectors& vectors,
                       const std::vector<UserId>& queries, int k,
                       const std::vector<UserId>& population, int workers) {
  if (k < 1) throw Error("knn: k must be >= 1");
  const auto pop = sorted_population(population, keys_of(vectors));
  std::vector<const SparseVector*> rows;
  std::vector<double> norms;
  rows.reserve(pop.size());
  for (const auto& u : pop) {
    const auto it = vectors.find(u);
    if (it == vectors.end()) throw Error("knn: no sparse vector for " + u);
    rows.push_back(&it->second);
    norms.push_back(norm(it->second));
  }
  // Inverted index: token -> population rows holding it.
  std::map<uint32_t, std::vector<size_t>> postings;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (const auto& e : rows[i]->entries) postings[e.index].push_back(i);
  }

  std::vector<NeighborList> lists(queries.size());
  parallel_for(queries.size(), workers, [&](size_t qi) {
    const UserId& q = queries[qi];
    const auto qit = vectors.find(q);
    if (qit == vectors.end()) throw Error("knn: no sparse vector for query " + q);
    const SparseVector& qv = qit->second;
    const double qn = norm(qv);

    std::vector<size_t> touched;
    for (const auto& e : qv.entries) {
      const auto p = postings.find(e.index);
      if (p != postings.end()) {
        touched.insert(touched.end(), p->second.begin(), p->second.end());
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    std::vector<Scored> scored;
    for (const size_t i : touched) {
      if (pop[i] == q) continue;
      scored.push_back({cosine_from(dot(qv, *rows[i]), qn, norms[i]), i});
    }
    // Rows sharing no token score exactly 0; only the smallest ids among
    // them can make the list.
    size_t filler = 0;
    for (size_t i = 0, t = 0; i < pop.size() && filler < static_cast<size_t>(k);
         ++i) {
      while (t < touched.size() && touched[t] < i) ++t;
      if ((t < touched.size() && touched[t] == i) || pop[i] == q) continue;
      scored.push_back({0.0, i});
      ++filler;
    }
    lists[qi] = top_k(q, std::move(scored), k, pop);
  });

  NeighborMap out;
  for (auto& l : lists) out.emplace(l.query, std::move(l));
  return out;
}

NeighborMap knn_dense(const EmbeddingModel& model,
                      const std::vector<UserId>& queries, int k,
                      const std::vector<UserId>& population, int workers) {
  if (k < 1) throw Error("knn: k must be >= 1");
  const auto pop = sorted_population(population, model.users);
  std::vector<std::span<const float>> rows;
  rows.reserve(pop.size());
  for (const auto& u : pop) rows.push_back(model.user_vector(u));

  std::vector<NeighborList> lists(queries.size());
  parallel_for(queries.size(), workers, [&](size_t qi) {
    const UserId& q = queries[qi];
    const auto qv = model.user_vector(q);
    std::vector<Scored> scored;
    scored.reserve(pop.size());
    for (size_t i = 0; i < pop.size(); ++i) {
      if (pop[i] == q) continue;
      scored.push_back({cosine(qv, rows[i]), i});
    }
    lists[qi] = top_k(q, std::move(scored), k, pop);
  });

  NeighborMap out;
  for (auto& l : lists) out.emplace(l.query, std::move(l));
  return out;
}

std::set<CandidatePair> union_candidates(
    const std::vector<const NeighborMap*>& maps, int k) {
  std::set<CandidatePair> out;
  for (const auto* map : maps) {
    for (const auto& [query, list] : *map) {
      const size_t limit = k > 0 ? std::min(list.neighbors.size(),
                                            static_cast<size_t>(k))
                                 : list.neighbors.size();
      for (size_t i = 0; i < limit; ++i) {
        out.emplace(query, list.neighbors[i].user);
      }
    }
  }
  return out;
}

std::vector<std::pair<int, double>> recall_at_k(
    const std::vector<const NeighborMap*>& maps, const PairSet& truth,
    const std::vector<int>& ks) {
  if (truth.empty()) throw Error("recall_at_k: empty truth set");
  std::vector<std::pair<int, double>> curve;
  curve.reserve(ks.size());
  for (const int k : ks) {
    if (k < 1) throw Error("recall_at_k: k must be >= 1");
    const auto pairs = union_candidates(maps, k);
    size_t hit = 0;
    for (const auto& p : truth) hit += pairs.count(p);
    curve.emplace_back(k, static_cast<double>(hit) / truth.size());
  }
  return curve;
}

void write_recall_report(std::ostream& out,
                         const std::vector<std::pair<int, double>>& curve) {
  for (const auto& [k, r] : curve) out << k << '\t' << r << '\n';
}

std::vector<const NeighborMap*> NeighborBundle::pointers() const {
  std::vector<const NeighborMap*> out;
  for (const auto& m : maps) out.push_back(&m);
  return out;
}

void write_neighbor_artifact(std::ostream& out, const NeighborBundle& bundle) {
  binio::Writer w(out);
  w.header(kNeighborMagic, kNeighborVersion);
  w.put<int32_t>(bundle.k);
  w.put_strings(bundle.names);
  w.put<uint64_t>(bundle.maps.size());
  for (const auto& map : bundle.maps) {
    w.put<uint64_t>(map.size());
    for (const auto& [query, list] : map) {
      w.put(query);
      w.put<uint64_t>(list.neighbors.size());
      for (const auto& n : list.neighbors) {
        w.put(n.user);
        w.put<double>(n.similarity);
      }
    }
  }
  w.check();
}

NeighborBundle read_neighbor_artifact(std::istream& in) {
  binio::Reader r(in);
  r.expect_header(kNeighborMagic, kNeighborVersion);
  NeighborBundle bundle;
  bundle.k = r.get<int32_t>();
  bundle.names = r.get_strings();
  const auto n_maps = r.get<uint64_t>();
  if (n_maps != bundle.names.size()) {
    throw Error("neighbor artifact: name/map count mismatch");
  }
  for (uint64_t m = 0; m < n_maps; ++m) {
    NeighborMap map;
    const auto n_queries = r.get<uint64_t>();
    for (uint64_t q = 0; q < n_queries; ++q) {
      NeighborList list;
      list.query = r.get_string();
      const auto n = r.get<uint64_t>();
      for (uint64_t i = 0; i < n; ++i) {
        Neighbor nb;
        nb.user = r.get_string();
        nb.similarity = r.get<double>();
        list.neighbors.push_back(std::move(nb));
      }
      map.emplace(list.query, std::move(list));
    }
    bundle.maps.push_back(std::move(map));
  }
  return bundle;
}

}  // namespace xdm

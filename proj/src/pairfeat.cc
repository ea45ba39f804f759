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

#include "xdevmatch/pairfeat.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

namespace xdm {
namespace {

constexpr int64_t kSecondsPerDay = 86400;

// Rounds toward negative infinity, so pre-epoch times land in valid bins.
int64_t floor_div(int64_t a, int64_t b) {
  const int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(',', start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

TimeProfile time_profile(const UserLog& log) {
  TimeProfile p;
  for (const auto& e : log.events) {
    const int64_t day = floor_div(e.timestamp, kSecondsPerDay);
    const int64_t second_of_day = e.timestamp - day * kSecondsPerDay;
    ++p.hourly[second_of_day / 3600];
    // 1970-01-01 was a Thursday, index 3 with Monday = 0.
    ++p.weekly[((day + 3) % 7 + 7) % 7];
  }
  return p;
}

DistanceFeatures distance_features(std::span<const float> u,
                                   std::span<const float> v) {
  if (u.size() != v.size()) throw Error("distance_features: dimension mismatch");
  DistanceFeatures f;
  double sq = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double d = static_cast<double>(u[i]) - v[i];
    sq += d * d;
    f.manhattan += std::abs(d);
  }
  f.euclidean = std::sqrt(sq);
  f.cosine = cosine(u, v);
  return f;
}

DistanceFeatures distance_features(const SparseVector& u, const SparseVector& v) {
  DistanceFeatures f;
  double sq = 0.0;
  auto i = u.entries.begin();
  auto j = v.entries.begin();
  auto take = [&](double d) {
    sq += d * d;
    f.manhattan += std::abs(d);
  };
  while (i != u.entries.end() || j != v.entries.end()) {
    if (j == v.entries.end() || (i != u.entries.end() && i->index < j->index)) {
      take(i->weight);
      ++i;
    } else if (i == u.entries.end() || j->index < i->index) {
      take(j->weight);
      ++j;
    } else {
      take(i->weight - j->weight);
      ++i;
      ++j;
    }
  }
  f.euclidean = std::sqrt(sq);
  f.cosine = cosine(u, v);
  return f;
}

RankFeatures rank_features(const CandidatePair& pair, const NeighborMap& map,
                           int k) {
  auto rank = [&](const UserId& from, const UserId& to) {
    const auto it = map.find(from);
    if (it != map.end()) {
      const auto& ns = it->second.neighbors;
      const size_t limit = std::min(ns.size(), static_cast<size_t>(k));
      for (size_t i = 0; i < limit; ++i) {
        if (ns[i].user == to) return static_cast<double>(i + 1);
      }
    }
    return static_cast<double>(k + 1);
  };
  return {rank(pair.a(), pair.b()), rank(pair.b(), pair.a())};
}

double profile_l1(std::span<const int64_t> p, std::span<const int64_t> q) {
  if (p.size() != q.size()) throw Error("profile_l1: bin count mismatch");
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    s += std::abs(static_cast<double>(p[i] - q[i]));
  }
  return s;
}

double symmetric_kl(std::span<const int64_t> p, std::span<const int64_t> q) {
  if (p.size() != q.size() || p.empty()) {
    throw Error("symmetric_kl: bin count mismatch");
  }
  // Plain normalized counts unless a zero bin on either side would leave
  // the divergence undefined; then both sides get one pseudo-count per bin.
  const bool zero_bin = std::find(p.begin(), p.end(), 0) != p.end() ||
                        std::find(q.begin(), q.end(), 0) != q.end();
  const double add = zero_bin ? 1.0 : 0.0;
  const double bins = static_cast<double>(p.size());
  const double sp = std::accumulate(p.begin(), p.end(), 0.0) + add * bins;
  const double sq = std::accumulate(q.begin(), q.end(), 0.0) + add * bins;
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double pi = (static_cast<double>(p[i]) + add) / sp;
    const double qi = (static_cast<double>(q[i]) + add) / sq;
    // KL(p||q) + KL(q||p) = sum (p - q) ln(p / q)
    kl += (pi - qi) * std::log(pi / qi);
  }
  return std::max(kl, 0.0);
}

int64_t bucket_overlap(std::span<const int64_t> a, std::span<const int64_t> b) {
  int64_t n = 0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

std::vector<int64_t> time_buckets(const UserLog& log, int64_t width_seconds) {
  std::vector<int64_t> buckets;
  buckets.reserve(log.events.size());
  for (const auto& e : log.events) buckets.push_back(floor_div(e.timestamp, width_seconds));
  std::sort(buckets.begin(), buckets.end());
  buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
  return buckets;
}

FeatureSchema FeatureSchema::for_representations(
    const std::vector<std::string>& rep_names) {
  std::vector<std::string> names;
  for (const auto& r : rep_names) {
    for (const char* f : {"cosine", "euclidean", "manhattan", "rank_ab", "rank_ba"}) {
      names.push_back(r + "." + f);
    }
  }
  for (const char* f : {"hourly_l1", "weekly_l1", "hourly_symkl", "weekly_symkl",
                        "overlap_5m", "overlap_10m", "overlap_60m"}) {
    names.push_back(std::string("time.") + f);
  }
  return FeatureSchema(std::move(names));
}

std::vector<std::string> FeatureSchema::standard_representations() {
  return {"tfidf_h0", "tfidf_h1", "tfidf_h2", "tfidf_h3", "emb_h0",
          "emb_h1",   "emb_h2",   "emb_h3",   "emb_title"};
}

FeatureSchema FeatureSchema::standard() {
  return for_representations(standard_representations());
}

void check_schema(const FeatureSchema& expected, const FeatureSchema& actual) {
  if (expected.size() != actual.size()) {
    throw Error("feature schema mismatch: expected " +
                std::to_string(expected.size()) + " features, got " +
                std::to_string(actual.size()));
  }
  for (size_t i = 0; i < expected.size(); ++i) {
    if (expected.names()[i] != actual.names()[i]) {
      throw Error("feature schema mismatch at " + std::to_string(i) + ": " +
                  expected.names()[i] + " vs " + actual.names()[i]);
    }
  }
}

FeatureContext::FeatureContext(std::vector<Representation> reps,
                               const std::vector<UserLog>& logs, int k)
    : reps_(std::move(reps)), k_(k) {
  if (k < 1) throw Error("FeatureContext: k must be >= 1");
  std::vector<std::string> names;
  for (const auto& r : reps_) {
    if ((r.sparse == nullptr) == (r.dense == nullptr)) {
      throw Error("representation " + r.name + " must be sparse or dense");
    }
    if (r.neighbors == nullptr) {
      throw Error("representation " + r.name + " has no neighbor map");
    }
    names.push_back(r.name);
    RankIndex index;
    for (const auto& [query, list] : *r.neighbors) {
      auto& row = index[query];
      const size_t limit = std::min(list.neighbors.size(), static_cast<size_t>(k));
      for (size_t i = 0; i < limit; ++i) {
        row.emplace(list.neighbors[i].user, static_cast<int>(i + 1));
      }
    }
    ranks_.push_back(std::move(index));
  }
  schema_ = FeatureSchema::for_representations(names);
  for (const auto& log : logs) {
    UserTime t;
    t.profile = time_profile(log);
    for (size_t w = 0; w < kOverlapWidths.size(); ++w) {
      t.buckets[w] = time_buckets(log, kOverlapWidths[w]);
    }
    times_.emplace(log.user_id, std::move(t));
  }
}

const FeatureContext::UserTime& FeatureContext::time_of(const UserId& user) const {
  const auto it = times_.find(user);
  if (it == times_.end()) throw Error("no event log for user " + user);
  return it->second;
}

double FeatureContext::rank_of(const RankIndex& index, const UserId& a,
                               const UserId& b) const {
  const auto row = index.find(a);
  if (row != index.end()) {
    const auto it = row->second.find(b);
    if (it != row->second.end()) return it->second;
  }
  return k_ + 1;
}

FeatureVector FeatureContext::assemble(const CandidatePair& pair) const {
  FeatureVector v;
  v.reserve(schema_.size());
  for (size_t r = 0; r < reps_.size(); ++r) {
    const auto& rep = reps_[r];
    DistanceFeatures d;
    if (rep.sparse != nullptr) {
      const auto ia = rep.sparse->find(pair.a());
      const auto ib = rep.sparse->find(pair.b());
      if (ia == rep.sparse->end() || ib == rep.sparse->end()) {
        throw Error("representation " + rep.name + " missing a user of pair " +
                    pair.a() + "," + pair.b());
      }
      d = distance_features(ia->second, ib->second);
    } else {
      d = distance_features(rep.dense->user_vector(pair.a()),
                            rep.dense->user_vector(pair.b()));
    }
    v.push_back(d.cosine);
    v.push_back(d.euclidean);
    v.push_back(d.manhattan);
    v.push_back(rank_of(ranks_[r], pair.a(), pair.b()));
    v.push_back(rank_of(ranks_[r], pair.b(), pair.a()));
  }
  const auto& ta = time_of(pair.a());
  const auto& tb = time_of(pair.b());
  v.push_back(profile_l1(ta.profile.hourly, tb.profile.hourly));
  v.push_back(profile_l1(ta.profile.weekly, tb.profile.weekly));
  v.push_back(symmetric_kl(ta.profile.hourly, tb.profile.hourly));
  v.push_back(symmetric_kl(ta.profile.weekly, tb.profile.weekly));
  for (size_t w = 0; w < kOverlapWidths.size(); ++w) {
    v.push_back(static_cast<double>(bucket_overlap(ta.buckets[w], tb.buckets[w])));
  }
  if (v.size() != schema_.size()) throw Error("feature vector length mismatch");
  return v;
}

std::vector<FeatureVector> FeatureContext::assemble_all(
    const std::vector<CandidatePair>& pairs, int workers) const {
  std::vector<FeatureVector> out(pairs.size());
  parallel_for(pairs.size(), workers,
               [&](size_t i) { out[i] = assemble(pairs[i]); });
  return out;
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m) {
  std::string line = "a,b";
  for (const auto& n : m.schema.names()) {
    line += ',';
    line += n;
  }
  out << line << '\n';
  for (size_t i = 0; i < m.pairs.size(); ++i) {
    line.clear();
    line += m.pairs[i].a();
    line += ',';
    line += m.pairs[i].b();
    for (const double x : m.rows[i]) {
      line += ',';
      append_double(line, x);
    }
    out << line << '\n';
  }
}

FeatureMatrix read_feature_matrix(std::istream& in) {
  FeatureMatrix m;
  std::string line;
  if (!std::getline(in, line)) throw Error("feature matrix: missing header");
  auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "a" || header[1] != "b") {
    throw Error("feature matrix: header must start with a,b");
  }
  m.schema = FeatureSchema(std::vector<std::string>(header.begin() + 2, header.end()));
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error("feature matrix line " + std::to_string(line_no) +
                  ": wrong field count");
    }
    m.pairs.emplace_back(std::string(fields[0]), std::string(fields[1]));
    FeatureVector row;
    row.reserve(fields.size() - 2);
    for (size_t i = 2; i < fields.size(); ++i) {
      double x = 0.0;
      const auto f = fields[i];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), x);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw Error("feature matrix line " + std::to_string(line_no) +
                    ": bad number");
      }
      row.push_back(x);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace xdm

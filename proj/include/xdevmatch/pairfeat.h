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

// Fixed-schema pair features: per-representation distances and neighbor
// ranks, followed by time-of-day / day-of-week profile comparisons.

#ifndef XDEVMATCH_PAIRFEAT_H_
#define XDEVMATCH_PAIRFEAT_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xdevmatch/candidates.h"
#include "xdevmatch/embed.h"
#include "xdevmatch/ingest.h"
#include "xdevmatch/vectorize.h"

namespace xdm {

// Hour and weekday counts in UTC; weekly[0] is Monday.
struct TimeProfile {
  std::array<int64_t, 24> hourly{};
  std::array<int64_t, 7> weekly{};
  friend bool operator==(const TimeProfile&, const TimeProfile&) = default;
};

TimeProfile time_profile(const UserLog& log);

struct DistanceFeatures {
  double cosine = 0.0;
  double euclidean = 0.0;
  double manhattan = 0.0;
};

DistanceFeatures distance_features(std::span<const float> u,
                                   std::span<const float> v);
DistanceFeatures distance_features(const SparseVector& u, const SparseVector& v);

struct RankFeatures {
  double rank_ab = 0.0;  // 1-based position of b in a's list, k + 1 if absent
  double rank_ba = 0.0;
};

RankFeatures rank_features(const CandidatePair& pair, const NeighborMap& map,
                           int k);

// Sum of absolute per-bin differences of the raw counts.
double profile_l1(std::span<const int64_t> p, std::span<const int64_t> q);

// KL(p||q) + KL(q||p) in nats on normalized counts. When either side has an
// empty bin, both get add-one smoothing first.
double symmetric_kl(std::span<const int64_t> p, std::span<const int64_t> q);

// Number of floor(t / width) buckets holding events from both users.
// Inputs are sorted distinct bucket ids.
int64_t bucket_overlap(std::span<const int64_t> a, std::span<const int64_t> b);

std::vector<int64_t> time_buckets(const UserLog& log, int64_t width_seconds);

inline constexpr std::array<int64_t, 3> kOverlapWidths = {300, 600, 3600};
inline constexpr int kTimeFeatureCount = 7;
inline constexpr int kFeaturesPerRepresentation = 5;

using FeatureVector = std::vector<double>;

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names)
      : names_(std::move(names)) {}

  // `<rep>.{cosine,euclidean,manhattan,rank_ab,rank_ba}` per representation,
  // then the seven time features.
  static FeatureSchema for_representations(
      const std::vector<std::string>& rep_names);
  // tfidf_h0..h3, emb_h0..h3, emb_title: 52 features.
  static FeatureSchema standard();
  static std::vector<std::string> standard_representations();

  size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<std::string> names_;
};

// Raises Error describing the first difference.
void check_schema(const FeatureSchema& expected, const FeatureSchema& actual);

// One user representation. Exactly one of sparse/dense is set; `neighbors`
// supplies rank features and must come from the same representation.
struct Representation {
  std::string name;
  const SparseVectors* sparse = nullptr;
  const EmbeddingModel* dense = nullptr;
  const NeighborMap* neighbors = nullptr;
};

// Everything needed to compute feature vectors for pairs of users drawn from
// one population. Borrowed representations must outlive the context.
class FeatureContext {
 public:
  FeatureContext(std::vector<Representation> reps,
                 const std::vector<UserLog>& logs, int k);

  const FeatureSchema& schema() const { return schema_; }
  int k() const { return k_; }

  // Raises Error when a user lacks a representation or time profile.
  FeatureVector assemble(const CandidatePair& pair) const;
  std::vector<FeatureVector> assemble_all(const std::vector<CandidatePair>& pairs,
                                          int workers = 1) const;

 private:
  struct UserTime {
    TimeProfile profile;
    std::array<std::vector<int64_t>, kOverlapWidths.size()> buckets;
  };
  using RankIndex = std::unordered_map<UserId, std::unordered_map<UserId, int>>;

  const UserTime& time_of(const UserId& user) const;
  double rank_of(const RankIndex& index, const UserId& a, const UserId& b) const;

  std::vector<Representation> reps_;
  std::vector<RankIndex> ranks_;
  std::unordered_map<UserId, UserTime> times_;
  FeatureSchema schema_;
  int k_;
};

// Feature matrix file: header `a,b,<schema names>`, then `a,b,v1,...,vN`
// rows with round-trip decimal precision.
struct FeatureMatrix {
  FeatureSchema schema;
  std::vector<CandidatePair> pairs;
  std::vector<FeatureVector> rows;
};

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(std::istream& in);

}  // namespace xdm

#endif  // XDEVMATCH_PAIRFEAT_H_

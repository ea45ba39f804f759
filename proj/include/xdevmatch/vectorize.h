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

#ifndef XDEVMATCH_VECTORIZE_H_
#define XDEVMATCH_VECTORIZE_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "xdevmatch/ingest.h"

namespace xdm {

struct TfidfModel;

struct VocabEntry {
  uint32_t index = 0;
  int64_t document_frequency = 0;
  int64_t corpus_count = 0;
};

// Pruned token vocabulary. Indices are dense and follow lexicographic token
// order, so two vocabularies built from the same corpus are identical.
class Vocabulary {
 public:
  Vocabulary() = default;

  size_t size() const { return tokens_.size(); }
  int64_t num_documents() const { return num_documents_; }
  int min_count() const { return min_count_; }

  const std::string& token(uint32_t index) const { return tokens_[index]; }
  const VocabEntry& entry(uint32_t index) const { return entries_[index]; }
  std::optional<uint32_t> find(const std::string& token) const;

  friend Vocabulary build_vocabulary(const Corpus& docs, int min_count);
  friend void write_tfidf_artifact(std::ostream&, const TfidfModel&);
  friend TfidfModel read_tfidf_artifact(std::istream&);

 private:
  void reindex();

  std::vector<std::string> tokens_;
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, uint32_t> lookup_;
  int64_t num_documents_ = 0;
  int min_count_ = 1;
};

// Raises Error when min_count < 1 or when every token is pruned.
Vocabulary build_vocabulary(const Corpus& docs, int min_count = 5);

struct SparseEntry {
  uint32_t index;
  double weight;
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Entries sorted by strictly increasing index, zero weights never stored.
struct SparseVector {
  std::vector<SparseEntry> entries;
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

using SparseVectors = std::map<UserId, SparseVector>;

double dot(const SparseVector& x, const SparseVector& y);
double norm(const SparseVector& x);

// weight(u, t) = tf(u, t) * ln(N / df(t)), N = documents the vocabulary was
// built from. Tokens missing from the vocabulary are ignored.
SparseVectors tfidf_vectors(const Corpus& docs, const Vocabulary& vocab);

// Vocabulary plus vectors for one hierarchy level.
struct TfidfModel {
  Vocabulary vocab;
  SparseVectors vectors;
};

TfidfModel build_tfidf(const Corpus& docs, int min_count);

void write_tfidf_artifact(std::ostream& out, const TfidfModel& model);
TfidfModel read_tfidf_artifact(std::istream& in);

}  // namespace xdm

#endif  // XDEVMATCH_VECTORIZE_H_

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

#include "xdevmatch/vectorize.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "xdevmatch/binio.h"

namespace xdm {
namespace {

constexpr char kTfidfMagic[] = "XDTF";
constexpr uint32_t kTfidfVersion = 1;

}  // namespace

std::optional<uint32_t> Vocabulary::find(const std::string& token) const {
  const auto it = lookup_.find(token);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::reindex() {
  lookup_.clear();
  lookup_.reserve(tokens_.size());
  for (uint32_t i = 0; i < tokens_.size(); ++i) lookup_.emplace(tokens_[i], i);
}

Vocabulary build_vocabulary(const Corpus& docs, int min_count) {
  if (min_count < 1) throw Error("build_vocabulary: min_count must be >= 1");
  // Ordered map gives the lexicographic index assignment for free.
  std::map<std::string, VocabEntry> counts;
  for (const auto& [user, tokens] : docs) {
    std::set<std::string_view> seen;
    for (const auto& t : tokens) {
      auto& e = counts[t];
      ++e.corpus_count;
      if (seen.insert(t).second) ++e.document_frequency;
    }
  }
  Vocabulary vocab;
  vocab.num_documents_ = static_cast<int64_t>(docs.size());
  vocab.min_count_ = min_count;
  for (auto& [token, e] : counts) {
    if (e.corpus_count < min_count) continue;
    e.index = static_cast<uint32_t>(vocab.tokens_.size());
    vocab.tokens_.push_back(token);
    vocab.entries_.push_back(e);
  }
  if (vocab.tokens_.empty()) {
    throw Error("build_vocabulary: every token pruned at min_count " +
                std::to_string(min_count));
  }
  vocab.reindex();
  return vocab;
}

double dot(const SparseVector& x, const SparseVector& y) {
  double s = 0.0;
  auto i = x.entries.begin();
  auto j = y.entries.begin();
  while (i != x.entries.end() && j != y.entries.end()) {
    if (i->index < j->index) {
      ++i;
    } else if (j->index < i->index) {
      ++j;
    } else {
      s += i->weight * j->weight;
      ++i;
      ++j;
    }
  }
  return s;
}

double norm(const SparseVector& x) {
  double s = 0.0;
  for (const auto& e : x.entries) s += e.weight * e.weight;
  return std::sqrt(s);
}

SparseVectors tfidf_vectors(const Corpus& docs, const Vocabulary& vocab) {
  const double n = static_cast<double>(vocab.num_documents());
  SparseVectors out;
  for (const auto& [user, tokens] : docs) {
    std::map<uint32_t, int64_t> tf;
    for (const auto& t : tokens) {
      if (const auto idx = vocab.find(t)) ++tf[*idx];
    }
    SparseVector v;
    for (const auto& [idx, count] : tf) {
      const double df = static_cast<double>(vocab.entry(idx).document_frequency);
      const double w = static_cast<double>(count) * std::log(n / df);
      if (w > 0.0) v.entries.push_back({idx, w});
    }
    out.emplace(user, std::move(v));
  }
  return out;
}

TfidfModel build_tfidf(const Corpus& docs, int min_count) {
  TfidfModel model;
  model.vocab = build_vocabulary(docs, min_count);
  model.vectors = tfidf_vectors(docs, model.vocab);
  return model;
}

void write_tfidf_artifact(std::ostream& out, const TfidfModel& model) {
  binio::Writer w(out);
  w.header(kTfidfMagic, kTfidfVersion);
  const auto& v = model.vocab;
  w.put<int64_t>(v.num_documents_);
  w.put<int32_t>(v.min_count_);
  w.put<uint64_t>(v.tokens_.size());
  for (size_t i = 0; i < v.tokens_.size(); ++i) {
    w.put(v.tokens_[i]);
    w.put<int64_t>(v.entries_[i].document_frequency);
    w.put<int64_t>(v.entries_[i].corpus_count);
  }
  w.put<uint64_t>(model.vectors.size());
  for (const auto& [user, vec] : model.vectors) {
    w.put(user);
    w.put<uint64_t>(vec.entries.size());
    for (const auto& e : vec.entries) {
      w.put<uint32_t>(e.index);
      w.put<double>(e.weight);
    }
  }
  w.check();
}

TfidfModel read_tfidf_artifact(std::istream& in) {
  binio::Reader r(in);
  r.expect_header(kTfidfMagic, kTfidfVersion);
  TfidfModel model;
  auto& v = model.vocab;
  v.num_documents_ = r.get<int64_t>();
  v.min_count_ = r.get<int32_t>();
  const auto n_tokens = r.get<uint64_t>();
  for (uint64_t i = 0; i < n_tokens; ++i) {
    v.tokens_.push_back(r.get_string());
    VocabEntry e;
    e.index = static_cast<uint32_t>(i);
    e.document_frequency = r.get<int64_t>();
    e.corpus_count = r.get<int64_t>();
    v.entries_.push_back(e);
  }
  v.reindex();
  const auto n_users = r.get<uint64_t>();
  for (uint64_t u = 0; u < n_users; ++u) {
    auto user = r.get_string();
    SparseVector vec;
    const auto nnz = r.get<uint64_t>();
    vec.entries.reserve(nnz);
    for (uint64_t k = 0; k < nnz; ++k) {
      const auto idx = r.get<uint32_t>();
      const auto wt = r.get<double>();
      if (idx >= n_tokens) throw Error("tfidf artifact: index out of range");
      vec.entries.push_back({idx, wt});
    }
    model.vectors.emplace(std::move(user), std::move(vec));
  }
  return model;
}

}  // namespace xdm

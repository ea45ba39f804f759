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

// Paragraph-vector (distributed bag of words) document embeddings trained
// with negative sampling, and the per-level ensemble built on top of them.
//
// For every position in a user's document the user vector is pushed to score
// the observed token above `negative_samples` tokens drawn from the unigram
// distribution raised to 3/4. With `train_words` set, skip-gram word vectors
// are trained alongside over a `window`-token context; the user vectors are
// unaffected by that pass except through the shared output weights.

#ifndef XDEVMATCH_EMBED_H_
#define XDEVMATCH_EMBED_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xdevmatch/ingest.h"

namespace xdm {

struct EmbedConfig {
  int dim = 32;
  int window = 5;
  int epochs = 20;
  int negative_samples = 5;
  double initial_lr = 0.05;
  double final_lr = 0.0001;
  int min_count = 5;
  uint64_t seed = 1;
  int workers = 1;  // 1 = deterministic, bit-reproducible
  bool train_words = false;

  void validate() const;
};

enum class ModelTag : uint8_t { kH0 = 0, kH1, kH2, kH3, kTitle };

inline constexpr int kEnsembleSize = 5;

std::string_view tag_name(ModelTag tag);
ModelTag level_tag(HierLevel h);

struct EmbeddingModel {
  EmbedConfig config;
  ModelTag tag = ModelTag::kH0;
  std::vector<UserId> users;       // sorted
  std::vector<float> user_matrix;  // users.size() x dim, row-major
  std::vector<std::string> tokens;  // vocabulary order
  std::vector<float> token_matrix;  // tokens.size() x dim
  std::vector<double> epoch_loss;   // mean negative-sampling loss per epoch

  int dim() const { return config.dim; }
  bool has_user(const UserId& user) const;
  // Raises Error for users the model was not trained on.
  std::span<const float> user_vector(const UserId& user) const;
  std::span<const float> user_row(size_t i) const {
    return {user_matrix.data() + i * config.dim,
            static_cast<size_t>(config.dim)};
  }
};

// Users whose documents are empty after pruning keep an all-zero vector.
// Raises Error on an empty corpus (no documents, or every token pruned) and
// on invalid configuration.
EmbeddingModel train_doc_embeddings(const Corpus& docs, const EmbedConfig& cfg,
                                    ModelTag tag = ModelTag::kH0);

// Five models: one per hierarchy level over deduplicated level tokens, plus
// one over title tokens. A level whose corpus is fully pruned yields an
// all-zero model instead of an error. Model i is seeded with cfg.seed + i.
std::vector<EmbeddingModel> embedding_ensemble(const std::vector<UserLog>& logs,
                                               const EmbedConfig& base_cfg);

void write_embedding_artifact(std::ostream& out, const EmbeddingModel& model);
EmbeddingModel read_embedding_artifact(std::istream& in);

}  // namespace xdm

#endif  // XDEVMATCH_EMBED_H_

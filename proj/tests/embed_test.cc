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

#include "xdevmatch/embed.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "xdevmatch/candidates.h"
#include "xdevmatch/synth.h"

namespace xdm {
namespace {

Corpus toy_corpus() {
  Corpus docs;
  for (int u = 0; u < 6; ++u) {
    auto& d = docs["u" + std::to_string(u)];
    for (int i = 0; i < 40; ++i) {
      d.push_back("t" + std::to_string((u % 2) * 10 + (i * 7 + u) % 10));
    }
  }
  return docs;
}

EmbedConfig small_config() {
  EmbedConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 5;
  cfg.min_count = 1;
  return cfg;
}

TEST(EmbedTest, ShapesAndSortedUsers) {
  const auto m = train_doc_embeddings(toy_corpus(), small_config(), ModelTag::kH1);
  EXPECT_EQ(m.tag, ModelTag::kH1);
  ASSERT_EQ(m.users.size(), 6u);
  EXPECT_TRUE(std::is_sorted(m.users.begin(), m.users.end()));
  EXPECT_EQ(m.user_matrix.size(), 6u * 8u);
  EXPECT_EQ(m.token_matrix.size(), m.tokens.size() * 8u);
  for (const auto& u : m.users) EXPECT_EQ(m.user_vector(u).size(), 8u);
  EXPECT_EQ(m.epoch_loss.size(), 5u);
  EXPECT_THROW(m.user_vector("nobody"), Error);
}

TEST(EmbedTest, PrunedTokensHaveNoVectors) {
  Corpus docs = toy_corpus();
  docs["u0"].push_back("rare");
  EmbedConfig cfg = small_config();
  cfg.min_count = 2;
  const auto m = train_doc_embeddings(docs, cfg);
  EXPECT_EQ(std::count(m.tokens.begin(), m.tokens.end(), "rare"), 0);
}

TEST(EmbedTest, DeterministicSingleWorker) {
  const auto a = train_doc_embeddings(toy_corpus(), small_config());
  const auto b = train_doc_embeddings(toy_corpus(), small_config());
  EXPECT_EQ(a.user_matrix, b.user_matrix);
  EXPECT_EQ(a.token_matrix, b.token_matrix);
  EmbedConfig other = small_config();
  other.seed = 2;
  EXPECT_NE(train_doc_embeddings(toy_corpus(), other).user_matrix, a.user_matrix);
}

TEST(EmbedTest, MultiWorkerProducesFiniteVectors) {
  EmbedConfig cfg = small_config();
  cfg.workers = 3;
  cfg.train_words = true;
  const auto m = train_doc_embeddings(toy_corpus(), cfg);
  for (const float x : m.user_matrix) EXPECT_TRUE(std::isfinite(x));
}

TEST(EmbedTest, ConfigAndCorpusErrors) {
  EmbedConfig cfg = small_config();
  cfg.dim = 1;
  EXPECT_THROW(train_doc_embeddings(toy_corpus(), cfg), Error);
  EXPECT_THROW(train_doc_embeddings(Corpus{}, small_config()), Error);
  cfg = small_config();
  cfg.final_lr = 0.1;
  cfg.initial_lr = 0.01;
  EXPECT_THROW(cfg.validate(), Error);
}

// Planted corpus: two devices of one persona against a device of another,
// 200 events each, no shared background.
struct PlantedOutcome {
  bool separated;
  bool loss_dropped;
};

PlantedOutcome planted_run(uint64_t seed) {
  SynthConfig sc;
  sc.n_personas = 2;
  sc.devices_min = sc.devices_max = 2;
  sc.events_min = sc.events_max = 200;
  sc.cross_device_noise = 0.0;
  sc.community_weight = 0.0;
  sc.device_drift = 0.0;
  sc.topic_concentration = 10.0;
  sc.seed = seed;
  const auto data = generate_dataset(sc);
  const auto docs = build_user_documents(data.logs, HierLevel(1));
  EmbedConfig cfg;
  cfg.seed = seed;
  cfg.min_count = 1;
  const auto m = train_doc_embeddings(docs, cfg, ModelTag::kH1);
  // logs are in persona order: users 0,1 share persona 0, user 2 is persona 1.
  const auto& u1 = data.logs[0].user_id;
  const auto& u2 = data.logs[1].user_id;
  const auto& u3 = data.logs[2].user_id;
  const double same = cosine(m.user_vector(u1), m.user_vector(u2));
  const double cross = cosine(m.user_vector(u1), m.user_vector(u3));
  return {same > cross, m.epoch_loss.front() > m.epoch_loss.back()};
}

TEST(EmbedTest, PlantedTopicsSeparateAndLossFalls) {
  int separated = 0, dropped = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = planted_run(seed);
    separated += r.separated;
    dropped += r.loss_dropped;
  }
  EXPECT_GE(separated, 9);
  EXPECT_GE(dropped, 9);
}

std::vector<UserLog> logs_from(const std::string& text) {
  std::istringstream in(text);
  return parse_events(in);
}

TEST(EnsembleTest, FiveModelsWithZeroTitleVectors) {
  std::string text;
  for (int i = 0; i < 30; ++i) {
    text += "a\t" + std::to_string(i) + "\tx.com/p" + std::to_string(i % 3) +
            (i % 2 ? "\tw1 w2\n" : "\t\n");
    text += "b\t" + std::to_string(i) + "\ty.com/q" + std::to_string(i % 4) + "\t\n";
  }
  EmbedConfig cfg = small_config();
  const auto models = embedding_ensemble(logs_from(text), cfg);
  ASSERT_EQ(models.size(), 5u);
  const ModelTag tags[] = {ModelTag::kH0, ModelTag::kH1, ModelTag::kH2, ModelTag::kH3,
                           ModelTag::kTitle};
  for (size_t i = 0; i < 5; ++i) EXPECT_EQ(models[i].tag, tags[i]);
  const auto title_b = models[4].user_vector("b");
  EXPECT_TRUE(std::all_of(title_b.begin(), title_b.end(), [](float x) { return x == 0; }));
  const auto title_a = models[4].user_vector("a");
  EXPECT_FALSE(std::all_of(title_a.begin(), title_a.end(), [](float x) { return x == 0; }));
}

TEST(EnsembleTest, NoTitlesAnywhereGivesZeroModel) {
  std::string text;
  for (int i = 0; i < 10; ++i) text += "u" + std::to_string(i % 2) + "\t1\tsite.com/x\n";
  EmbedConfig cfg = small_config();
  const auto models = embedding_ensemble(logs_from(text), cfg);
  for (const float x : models[4].user_matrix) EXPECT_EQ(x, 0.0f);
  EXPECT_EQ(models[4].users.size(), 2u);
}

TEST(EmbedArtifactTest, ExactRoundTrip) {
  const auto m = train_doc_embeddings(toy_corpus(), small_config(), ModelTag::kTitle);
  std::stringstream ss;
  write_embedding_artifact(ss, m);
  const auto back = read_embedding_artifact(ss);
  EXPECT_EQ(back.tag, m.tag);
  EXPECT_EQ(back.users, m.users);
  EXPECT_EQ(back.user_matrix, m.user_matrix);
  EXPECT_EQ(back.tokens, m.tokens);
  EXPECT_EQ(back.token_matrix, m.token_matrix);
  EXPECT_EQ(back.epoch_loss, m.epoch_loss);
  EXPECT_EQ(back.config.dim, m.config.dim);
  EXPECT_EQ(back.config.seed, m.config.seed);
}

}  // namespace
}  // namespace xdm

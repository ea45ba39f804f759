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
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_map>

#include "xdevmatch/binio.h"
#include "xdevmatch/vectorize.h"

namespace xdm {
namespace {

constexpr char kEmbedMagic[] = "XDEM";
constexpr uint32_t kEmbedVersion = 1;

// Element access for the single-worker path.
struct PlainAccess {
  static float load(const float& x) { return x; }
  static void add(float& x, float v) { x += v; }
};

// Hogwild access for multi-worker training: relaxed atomics make the
// concurrent read-modify-write well defined while still allowing lost
// updates, as asynchronous SGD expects.
struct RelaxedAccess {
  static float load(const float& x) {
    return std::atomic_ref<float>(const_cast<float&>(x))
        .load(std::memory_order_relaxed);
  }
  static void add(float& x, float v) {
    std::atomic_ref<float> r(x);
    r.store(r.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
  }
};

struct CorpusIndex {
  std::vector<UserId> users;
  std::vector<std::vector<uint32_t>> docs;
  uint64_t total_tokens = 0;
};

class NegativeSampler {
 public:
  explicit NegativeSampler(const Vocabulary& vocab) : cdf_(vocab.size()) {
    double acc = 0.0;
    for (uint32_t i = 0; i < vocab.size(); ++i) {
      acc += std::pow(static_cast<double>(vocab.entry(i).corpus_count), 0.75);
      cdf_[i] = acc;
    }
  }

  uint32_t draw(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, cdf_.back());
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u(rng));
    return static_cast<uint32_t>(
        std::min<size_t>(it - cdf_.begin(), cdf_.size() - 1));
  }

 private:
  std::vector<double> cdf_;
};

struct TrainState {
  const EmbedConfig& cfg;
  const NegativeSampler& sampler;
  float* out_vectors;   // token output weights
  float* word_vectors;  // skip-gram input vectors, train_words only
};

// One negative-sampling update of `input` against `target`. Returns the
// loss of the positive plus the sampled negatives.
template <typename Access>
double train_target(TrainState& st, float* input, uint32_t target,
                    std::mt19937_64& rng, float lr, std::vector<float>& grad) {
  const int dim = st.cfg.dim;
  std::fill(grad.begin(), grad.end(), 0.0f);
  double loss = 0.0;
  for (int d = 0; d <= st.cfg.negative_samples; ++d) {
    uint32_t t = target;
    float label = 1.0f;
    if (d > 0) {
      t = st.sampler.draw(rng);
      if (t == target) continue;
      label = 0.0f;
    }
    float* row = st.out_vectors + static_cast<size_t>(t) * dim;
    double f = 0.0;
    for (int c = 0; c < dim; ++c) {
      f += static_cast<double>(Access::load(input[c])) * Access::load(row[c]);
    }
    const double sig = 1.0 / (1.0 + std::exp(-f));
    loss += label > 0 ? std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
    const float g = static_cast<float>((label - sig) * lr);
    for (int c = 0; c < dim; ++c) {
      grad[c] += g * Access::load(row[c]);
      Access::add(row[c], g * Access::load(input[c]));
    }
  }
  for (int c = 0; c < dim; ++c) Access::add(input[c], grad[c]);
  return loss;
}

struct EpochTotals {
  double loss = 0.0;
  uint64_t positions = 0;
};

template <typename Access>
EpochTotals train_docs(TrainState& st, const CorpusIndex& corpus,
                       std::span<const size_t> order, float* user_vectors,
                       std::atomic<uint64_t>& processed, uint64_t budget,
                       std::mt19937_64& rng) {
  const auto& cfg = st.cfg;
  std::vector<float> grad(cfg.dim);
  EpochTotals totals;
  std::uniform_int_distribution<int> shrink(0, std::max(cfg.window - 1, 0));
  for (const size_t di : order) {
    const auto& doc = corpus.docs[di];
    float* uvec = user_vectors + di * cfg.dim;
    for (size_t pos = 0; pos < doc.size(); ++pos) {
      const double progress =
          static_cast<double>(processed.fetch_add(1, std::memory_order_relaxed)) /
          static_cast<double>(budget);
      const auto lr = static_cast<float>(
          cfg.initial_lr -
          (cfg.initial_lr - cfg.final_lr) * std::min(progress, 1.0));
      totals.loss += train_target<Access>(st, uvec, doc[pos], rng, lr, grad);
      ++totals.positions;
      if (cfg.train_words) {
        const int reach = cfg.window - shrink(rng);
        const size_t lo = pos >= static_cast<size_t>(reach) ? pos - reach : 0;
        const size_t hi = std::min(doc.size(), pos + reach + 1);
        for (size_t c = lo; c < hi; ++c) {
          if (c == pos) continue;
          float* wvec = st.word_vectors + static_cast<size_t>(doc[c]) * cfg.dim;
          train_target<Access>(st, wvec, doc[pos], rng, lr, grad);
        }
      }
    }
  }
  return totals;
}

void init_uniform(std::vector<float>& v, int dim, std::mt19937_64& rng) {
  const float bound = 0.5f / static_cast<float>(dim);
  std::uniform_real_distribution<float> u(-bound, bound);
  for (auto& x : v) x = u(rng);
}

EmbeddingModel zero_model(const Corpus& docs, const EmbedConfig& cfg,
                          ModelTag tag) {
  EmbeddingModel m;
  m.config = cfg;
  m.tag = tag;
  for (const auto& [user, tokens] : docs) m.users.push_back(user);
  m.user_matrix.assign(m.users.size() * cfg.dim, 0.0f);
  return m;
}

bool fully_pruned(const Corpus& docs, int min_count) {
  std::unordered_map<std::string_view, int64_t> counts;
  for (const auto& [user, tokens] : docs) {
    for (const auto& t : tokens) {
      if (++counts[t] >= min_count) return false;
    }
  }
  return true;
}

}  // namespace

void EmbedConfig::validate() const {
  if (dim < 2) throw Error("embed: dim must be >= 2");
  if (window < 1) throw Error("embed: window must be >= 1");
  if (negative_samples < 1) throw Error("embed: negative_samples must be >= 1");
  if (epochs < 1) throw Error("embed: epochs must be >= 1");
  if (!(final_lr > 0) || !(initial_lr >= final_lr)) {
    throw Error("embed: learning rates must satisfy initial >= final > 0");
  }
  if (min_count < 1) throw Error("embed: min_count must be >= 1");
  if (workers < 1) throw Error("embed: workers must be >= 1");
}

std::string_view tag_name(ModelTag tag) {
  switch (tag) {
    case ModelTag::kH0: return "h0";
    case ModelTag::kH1: return "h1";
    case ModelTag::kH2: return "h2";
    case ModelTag::kH3: return "h3";
    case ModelTag::kTitle: return "title";
  }
  return "h0";
}

ModelTag level_tag(HierLevel h) { return static_cast<ModelTag>(h.value()); }

bool EmbeddingModel::has_user(const UserId& user) const {
  return std::binary_search(users.begin(), users.end(), user);
}

std::span<const float> EmbeddingModel::user_vector(const UserId& user) const {
  const auto it = std::lower_bound(users.begin(), users.end(), user);
  if (it == users.end() || *it != user) {
    throw Error("embedding model " + std::string(tag_name(tag)) +
                " has no vector for user " + user);
  }
  return user_row(static_cast<size_t>(it - users.begin()));
}

EmbeddingModel train_doc_embeddings(const Corpus& docs, const EmbedConfig& cfg,
                                    ModelTag tag) {
  cfg.validate();
  if (docs.empty()) throw Error("embed: empty corpus");
  const Vocabulary vocab = build_vocabulary(docs, cfg.min_count);

  CorpusIndex corpus;
  for (const auto& [user, tokens] : docs) {
    corpus.users.push_back(user);
    auto& ids = corpus.docs.emplace_back();
    for (const auto& t : tokens) {
      if (const auto idx = vocab.find(t)) ids.push_back(*idx);
    }
    corpus.total_tokens += ids.size();
  }

  std::mt19937_64 rng(cfg.seed);
  EmbeddingModel model;
  model.config = cfg;
  model.tag = tag;
  model.users = corpus.users;
  model.user_matrix.resize(corpus.users.size() * cfg.dim);
  model.token_matrix.resize(vocab.size() * cfg.dim);
  init_uniform(model.user_matrix, cfg.dim, rng);
  init_uniform(model.token_matrix, cfg.dim, rng);
  std::vector<float> word_matrix;
  if (cfg.train_words) {
    word_matrix.resize(vocab.size() * cfg.dim);
    init_uniform(word_matrix, cfg.dim, rng);
  }
  model.tokens.reserve(vocab.size());
  for (uint32_t i = 0; i < vocab.size(); ++i) model.tokens.push_back(vocab.token(i));

  const NegativeSampler sampler(vocab);
  TrainState st{cfg, sampler, model.token_matrix.data(), word_matrix.data()};
  const uint64_t budget =
      std::max<uint64_t>(1, corpus.total_tokens * static_cast<uint64_t>(cfg.epochs));
  std::atomic<uint64_t> processed{0};
  std::vector<size_t> order(corpus.docs.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochTotals totals;
    if (cfg.workers == 1) {
      totals = train_docs<PlainAccess>(st, corpus, order, model.user_matrix.data(),
                                       processed, budget, rng);
    } else {
      const size_t nw = static_cast<size_t>(cfg.workers);
      std::vector<EpochTotals> parts(nw);
      std::vector<std::thread> pool;
      const size_t chunk = (order.size() + nw - 1) / nw;
      for (size_t w = 0; w < nw; ++w) {
        const size_t lo = std::min(order.size(), w * chunk);
        const size_t hi = std::min(order.size(), lo + chunk);
        const uint64_t worker_seed = rng();
        pool.emplace_back([&, lo, hi, w, worker_seed] {
          std::mt19937_64 local(worker_seed);
          parts[w] = train_docs<RelaxedAccess>(
              st, corpus, std::span<const size_t>(order).subspan(lo, hi - lo),
              model.user_matrix.data(), processed, budget, local);
        });
      }
      for (auto& th : pool) th.join();
      for (const auto& p : parts) {
        totals.loss += p.loss;
        totals.positions += p.positions;
      }
    }
    model.epoch_loss.push_back(
        totals.positions ? totals.loss / static_cast<double>(totals.positions) : 0.0);
  }

  // Documents that lost every token to pruning carry no signal.
  for (size_t i = 0; i < corpus.docs.size(); ++i) {
    if (corpus.docs[i].empty()) {
      std::fill_n(model.user_matrix.begin() + i * cfg.dim, cfg.dim, 0.0f);
    }
  }
  return model;
}

std::vector<EmbeddingModel> embedding_ensemble(const std::vector<UserLog>& logs,
                                               const EmbedConfig& base_cfg) {
  base_cfg.validate();
  std::vector<EmbeddingModel> models;
  models.reserve(kEnsembleSize);
  auto train = [&](const Corpus& docs, ModelTag tag) {
    EmbedConfig cfg = base_cfg;
    cfg.seed = base_cfg.seed + static_cast<uint64_t>(tag);
    if (docs.empty() || fully_pruned(docs, cfg.min_count)) {
      models.push_back(zero_model(docs, cfg, tag));
    } else {
      models.push_back(train_doc_embeddings(docs, cfg, tag));
    }
  };
  for (int h = 0; h < HierLevel::kCount; ++h) {
    train(build_user_documents(logs, HierLevel(h)), level_tag(HierLevel(h)));
  }
  train(build_title_documents(logs), ModelTag::kTitle);
  return models;
}

void write_embedding_artifact(std::ostream& out, const EmbeddingModel& m) {
  binio::Writer w(out);
  w.header(kEmbedMagic, kEmbedVersion);
  const auto& c = m.config;
  w.put<int32_t>(c.dim);
  w.put<int32_t>(c.window);
  w.put<int32_t>(c.epochs);
  w.put<int32_t>(c.negative_samples);
  w.put<double>(c.initial_lr);
  w.put<double>(c.final_lr);
  w.put<int32_t>(c.min_count);
  w.put<uint64_t>(c.seed);
  w.put<int32_t>(c.workers);
  w.put<uint8_t>(c.train_words ? 1 : 0);
  w.put<uint8_t>(static_cast<uint8_t>(m.tag));
  w.put_strings(m.users);
  w.put_span<float>(m.user_matrix);
  w.put_strings(m.tokens);
  w.put_span<float>(m.token_matrix);
  w.put_span<double>(m.epoch_loss);
  w.check();
}

EmbeddingModel read_embedding_artifact(std::istream& in) {
  binio::Reader r(in);
  r.expect_header(kEmbedMagic, kEmbedVersion);
  EmbeddingModel m;
  auto& c = m.config;
  c.dim = r.get<int32_t>();
  c.window = r.get<int32_t>();
  c.epochs = r.get<int32_t>();
  c.negative_samples = r.get<int32_t>();
  c.initial_lr = r.get<double>();
  c.final_lr = r.get<double>();
  c.min_count = r.get<int32_t>();
  c.seed = r.get<uint64_t>();
  c.workers = r.get<int32_t>();
  c.train_words = r.get<uint8_t>() != 0;
  const auto tag = r.get<uint8_t>();
  if (tag >= kEnsembleSize) throw Error("embedding artifact: bad model tag");
  m.tag = static_cast<ModelTag>(tag);
  m.users = r.get_strings();
  m.user_matrix = r.get_vector<float>();
  m.tokens = r.get_strings();
  m.token_matrix = r.get_vector<float>();
  m.epoch_loss = r.get_vector<double>();
  if (c.dim < 2 || m.user_matrix.size() != m.users.size() * c.dim ||
      m.token_matrix.size() != m.tokens.size() * c.dim) {
    throw Error("embedding artifact: matrix shape mismatch");
  }
  return m;
}

}  // namespace xdm

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

#include "xdevmatch/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace xdm {
namespace {

constexpr size_t kTfidfLevels = 4;

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn,
                std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  fn(out);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<CandidatePair> pairs_of(const std::vector<ScoredPair>& scored) {
  std::vector<CandidatePair> out;
  out.reserve(scored.size());
  for (const auto& sp : scored) out.push_back(sp.pair);
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (tfidf_min_count < 1) throw Error("tfidf.min_count must be >= 1");
  embed.validate();
  if (k < 1) throw Error("knn.k must be >= 1");
  for (const int r : recall_ks) {
    if (r < 1) throw Error("knn.recall_ks entries must be >= 1");
  }
  const auto known = Representations::names();
  for (const auto& src : knn_sources) {
    if (std::find(known.begin(), known.end(), src) == known.end()) {
      throw Error("knn.sources: unknown representation '" + src + "'");
    }
  }
  if (!(neg_ratio > 0)) throw Error("sample.neg_ratio must be > 0");
  scorer.validate();
  voter.validate();
  if (!(voter_input_ratio > 0)) throw Error("voter.input_ratio must be > 0");
  if (!(sup_ratio >= 0 && sup_ratio <= unsup_ratio && unsup_ratio <= 1)) {
    throw Error("select ratios must satisfy 0 <= sup_ratio <= unsup_ratio <= 1");
  }
  if (n_final < 0) throw Error("select.n_final must be >= 0");
  if (!(alpha > 0 && alpha < 1)) throw Error("select.alpha must be in (0, 1)");
  if (beta < 2) throw Error("select.beta must be >= 2");
  if (workers < 1) throw Error("pipeline.workers must be >= 1");
}

void PipelineConfig::force_deterministic() {
  deterministic = true;
  workers = 1;
  embed.workers = 1;
}

std::vector<std::string> Representations::names() {
  return FeatureSchema::standard_representations();
}

Representations build_representations(const std::vector<UserLog>& logs,
                                      const PipelineConfig& cfg) {
  Representations reps;
  for (size_t h = 0; h < kTfidfLevels; ++h) {
    reps.tfidf.push_back(build_tfidf(
        build_user_documents(logs, HierLevel(static_cast<int>(h))),
        cfg.tfidf_min_count));
  }
  EmbedConfig ecfg = cfg.embed;
  if (cfg.deterministic) ecfg.workers = 1;
  reps.embeddings = embedding_ensemble(logs, ecfg);
  return reps;
}

void save_tfidf_models(const std::string& dir, const std::vector<TfidfModel>& models) {
  std::filesystem::create_directories(dir);
  for (size_t h = 0; h < models.size(); ++h) {
    write_file(std::filesystem::path(dir) / ("tfidf_h" + std::to_string(h) + ".bin"),
               [&](std::ostream& o) { write_tfidf_artifact(o, models[h]); },
               std::ios::binary);
  }
}

void save_embedding_models(const std::string& dir,
                           const std::vector<EmbeddingModel>& models) {
  std::filesystem::create_directories(dir);
  for (const auto& m : models) {
    write_file(std::filesystem::path(dir) /
                   ("emb_" + std::string(tag_name(m.tag)) + ".bin"),
               [&](std::ostream& o) { write_embedding_artifact(o, m); },
               std::ios::binary);
  }
}

Representations load_representations(const std::string& dir) {
  auto open = [&](const std::string& name) {
    const auto path = std::filesystem::path(dir) / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing artifact " + path.string());
    return in;
  };
  Representations reps;
  for (size_t h = 0; h < kTfidfLevels; ++h) {
    auto in = open("tfidf_h" + std::to_string(h) + ".bin");
    reps.tfidf.push_back(read_tfidf_artifact(in));
  }
  for (int t = 0; t < kEnsembleSize; ++t) {
    auto in = open("emb_" + std::string(tag_name(static_cast<ModelTag>(t))) + ".bin");
    reps.embeddings.push_back(read_embedding_artifact(in));
    if (reps.embeddings.back().tag != static_cast<ModelTag>(t)) {
      throw Error("embedding artifact tag mismatch in " + dir);
    }
  }
  return reps;
}

std::vector<UserId> partition_users(const SplitMap& splits, Partition p) {
  std::vector<UserId> out;
  for (const auto& [user, part] : splits) {
    if (part == p) out.push_back(user);
  }
  return out;
}

PairSet partition_truth(const std::vector<CandidatePair>& truth,
                        const SplitMap& splits, Partition p) {
  return restrict_pairs(truth, [&](const UserId& u) {
    const auto it = splits.find(u);
    return it != splits.end() && it->second == p;
  });
}

NeighborBundle partition_neighbors(const Representations& reps,
                                   const std::vector<UserId>& users, int k,
                                   int workers) {
  NeighborBundle bundle;
  bundle.k = k;
  bundle.names = Representations::names();
  for (const auto& t : reps.tfidf) {
    bundle.maps.push_back(knn_sparse(t.vectors, users, k, users, workers));
  }
  for (const auto& e : reps.embeddings) {
    bundle.maps.push_back(knn_dense(e, users, k, users, workers));
  }
  return bundle;
}

std::vector<const NeighborMap*> select_sources(const NeighborBundle& bundle,
                                               const std::vector<std::string>& sources) {
  if (sources.empty()) return bundle.pointers();
  std::vector<const NeighborMap*> out;
  for (const auto& src : sources) {
    const auto it = std::find(bundle.names.begin(), bundle.names.end(), src);
    if (it == bundle.names.end()) throw Error("no neighbor lists for source '" + src + "'");
    out.push_back(&bundle.maps[static_cast<size_t>(it - bundle.names.begin())]);
  }
  return out;
}

FeatureContext make_feature_context(const Representations& reps,
                                    const NeighborBundle& bundle,
                                    const std::vector<UserLog>& logs, int k) {
  const auto names = Representations::names();
  if (bundle.maps.size() != names.size()) {
    throw Error("neighbor bundle must hold " + std::to_string(names.size()) +
                " maps");
  }
  std::vector<Representation> list;
  for (size_t i = 0; i < names.size(); ++i) {
    Representation r;
    r.name = names[i];
    if (i < kTfidfLevels) {
      r.sparse = &reps.tfidf[i].vectors;
    } else {
      r.dense = &reps.embeddings[i - kTfidfLevels];
    }
    r.neighbors = &bundle.maps[i];
    list.push_back(std::move(r));
  }
  return FeatureContext(std::move(list), logs, k);
}

std::vector<ScoredPair> knn_baseline(const Representations& reps,
                                     const NeighborBundle& bundle,
                                     const std::vector<size_t>& rep_indices,
                                     int k) {
  if (rep_indices.empty()) throw Error("knn_baseline: no representations");
  std::vector<const NeighborMap*> maps;
  for (const size_t i : rep_indices) maps.push_back(&bundle.maps.at(i));
  std::vector<ScoredPair> out;
  for (const auto& p : union_candidates(maps, k)) {
    double total = 0.0;
    for (const size_t i : rep_indices) {
      if (i < kTfidfLevels) {
        const auto& v = reps.tfidf[i].vectors;
        total += cosine(v.at(p.a()), v.at(p.b()));
      } else {
        const auto& m = reps.embeddings.at(i - kTfidfLevels);
        total += cosine(m.user_vector(p.a()), m.user_vector(p.b()));
      }
    }
    out.push_back({p, total / static_cast<double>(rep_indices.size())});
  }
  std::sort(out.begin(), out.end(), [](const ScoredPair& x, const ScoredPair& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.pair < y.pair;
  });
  return out;
}

PipelineResult run_pipeline(const std::vector<UserLog>& logs,
                            const std::vector<CandidatePair>& truth,
                            const SplitMap& splits, const PipelineConfig& cfg_in,
                            const std::string& out_dir) {
  PipelineConfig cfg = cfg_in;
  if (cfg.deterministic) cfg.force_deterministic();
  cfg.validate();
  namespace fs = std::filesystem;
  const bool emit = !out_dir.empty();
  const fs::path root(out_dir);
  if (emit) fs::create_directories(root);

  const int k_search =
      std::max(cfg.k, cfg.recall_ks.empty()
                          ? cfg.k
                          : *std::max_element(cfg.recall_ks.begin(), cfg.recall_ks.end()));
  const Representations reps = build_representations(logs, cfg);
  if (emit) {
    save_tfidf_models(out_dir, reps.tfidf);
    save_embedding_models(out_dir, reps.embeddings);
  }

  struct Part {
    std::vector<UserId> users;
    PairSet truth;
    NeighborBundle bundle;
    std::vector<CandidatePair> candidates;
  };
  auto prepare = [&](Partition p) {
    Part part;
    part.users = partition_users(splits, p);
    if (part.users.size() < 2) {
      throw Error(std::string("partition ") + std::string(partition_name(p)) +
                  " has fewer than 2 users");
    }
    part.truth = partition_truth(truth, splits, p);
    if (part.truth.empty()) {
      throw Error(std::string("partition ") + std::string(partition_name(p)) +
                  " has no truth pairs");
    }
    part.bundle = partition_neighbors(reps, part.users, k_search, cfg.workers);
    const auto set = union_candidates(select_sources(part.bundle, cfg.knn_sources), cfg.k);
    part.candidates.assign(set.begin(), set.end());
    if (emit) {
      write_pairs_file(
          (root / ("candidates_" + std::string(partition_name(p)) + ".csv")).string(),
          part.candidates);
    }
    return part;
  };

  PipelineResult result;
  const FeatureSchema schema = FeatureSchema::standard();

  // Stage 1: scorer on train1 with hard negatives from the candidate pool.
  PairClassifier scorer;
  {
    const Part p1 = prepare(Partition::kTrain1);
    const FeatureContext ctx = make_feature_context(reps, p1.bundle, logs, cfg.k);
    const std::set<CandidatePair> pool(p1.candidates.begin(), p1.candidates.end());
    auto labeled = sample_training_pairs(p1.users, pool, p1.truth, cfg.neg_ratio,
                                         cfg.sample_seed);
    std::vector<CandidatePair> pairs;
    for (const auto& lp : labeled) pairs.push_back(lp.pair);
    auto rows = ctx.assemble_all(pairs, cfg.workers);
    for (size_t i = 0; i < labeled.size(); ++i) labeled[i].features = std::move(rows[i]);
    scorer = train_gbdt(labeled, ctx.schema(), cfg.scorer);
    result.importance = feature_importance(scorer);
    if (emit) {
      FeatureMatrix m{ctx.schema(), pairs, {}};
      for (const auto& lp : labeled) m.rows.push_back(lp.features);
      write_file(root / "features_train1.csv",
                 [&](std::ostream& o) { write_feature_matrix(o, m); });
      write_file(root / "scorer.bin",
                 [&](std::ostream& o) { write_classifier_artifact(o, scorer); },
                 std::ios::binary);
      write_file(root / "importance.tsv",
                 [&](std::ostream& o) { write_importance_report(o, result.importance); });
    }
  }

  // Stage 2: voter on train2 from blind inference over the scorer's ranking.
  PairClassifier voter;
  {
    const Part p2 = prepare(Partition::kTrain2);
    const FeatureContext ctx = make_feature_context(reps, p2.bundle, logs, cfg.k);
    const auto scored =
        score_pairs(scorer, schema, p2.candidates, ctx.assemble_all(p2.candidates, cfg.workers));
    const auto n_input = std::min(
        scored.size(), static_cast<size_t>(std::llround(
                           cfg.voter_input_ratio * static_cast<double>(p2.truth.size()))));
    const std::vector<ScoredPair> top(scored.begin(), scored.begin() + n_input);
    const FeatureSource source = [&](const CandidatePair& p) { return ctx.assemble(p); };
    auto training = train_voter(top, p2.truth, source, schema, cfg.voter);
    voter = std::move(training.voter);
    const std::set<CandidatePair> pool(p2.candidates.begin(), p2.candidates.end());
    result.voter_pairs = training.data.size();
    for (const auto& lp : training.data) {
      result.voter_pairs_outside_candidates += pool.count(lp.pair) ? 0 : 1;
    }
    if (emit) {
      write_file(root / "scored_train2.csv",
                 [&](std::ostream& o) { write_scored_pairs(o, scored); });
      write_file(root / "voter.bin",
                 [&](std::ostream& o) { write_classifier_artifact(o, voter); },
                 std::ios::binary);
      std::vector<CandidatePair> extended;
      for (const auto& lp : training.data) extended.push_back(lp.pair);
      write_pairs_file((root / "extended_train2_blind.csv").string(), extended);
    }
  }

  // Stage 3: held-out ranking, inference and final selection.
  const Part p3 = prepare(Partition::kHeldout);
  const FeatureContext ctx = make_feature_context(reps, p3.bundle, logs, cfg.k);
  const auto features = ctx.assemble_all(p3.candidates, cfg.workers);
  const auto scored = score_pairs(scorer, schema, p3.candidates, features);
  {
    std::vector<double> s;
    std::vector<int> y;
    for (const auto& sp : scored) {
      s.push_back(sp.score);
      y.push_back(p3.truth.count(sp.pair) ? 1 : 0);
    }
    const bool both = std::count(y.begin(), y.end(), 1) > 0 &&
                      std::count(y.begin(), y.end(), 0) > 0;
    result.heldout_auc = both ? roc_auc(s, y) : 0.0;
  }
  std::vector<int> ks;
  for (const int r : cfg.recall_ks) {
    if (r <= k_search) ks.push_back(r);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (!ks.empty()) result.heldout_recall =
        recall_at_k(select_sources(p3.bundle, cfg.knn_sources), p3.truth, ks);

  const auto n_final = static_cast<size_t>(
      cfg.n_final > 0 ? cfg.n_final : static_cast<int64_t>(p3.truth.size()));
  SelectionParams sel =
      SelectionParams::from_budget(n_final, scored.size(), cfg.sup_ratio, cfg.unsup_ratio);
  sel.alpha = cfg.alpha;
  sel.beta = cfg.beta;
  result.selection = sel;
  const FeatureSource source = [&](const CandidatePair& p) { return ctx.assemble(p); };
  const auto k_eval = static_cast<int64_t>(n_final);

  auto variant = [&](const std::string& name, bool sup, bool unsup) {
    SelectionParams p = sel;
    p.use_supervised = sup;
    p.use_unsupervised = unsup;
    auto r = final_selection(scored, &voter, source, p);
    result.ablations.push_back({name, score_submission(r.submission, p3.truth, k_eval)});
    return r;
  };
  variant("no_inference", false, false);
  variant("supervised_only", true, false);
  variant("unsupervised_only", false, true);
  const auto selection = variant("both", true, true);
  result.submission = selection.submission;
  result.final_report = result.ablations.back().report;

  const auto tfidf_rank = knn_baseline(reps, p3.bundle, {0, 1, 2, 3}, cfg.k);
  const auto emb_rank = knn_baseline(reps, p3.bundle, {4, 5, 6, 7, 8}, cfg.k);
  result.baselines.push_back(
      {"tfidf_knn", score_submission(pairs_of(tfidf_rank), p3.truth, k_eval)});
  result.baselines.push_back(
      {"doc2vec_knn", score_submission(pairs_of(emb_rank), p3.truth, k_eval)});

  if (emit) {
    write_file(root / "scored_heldout.csv",
               [&](std::ostream& o) { write_scored_pairs(o, scored); });
    write_pairs_file((root / "extended_heldout_supervised.csv").string(),
                     selection.supervised);
    write_pairs_file((root / "extended_heldout_unsupervised.csv").string(),
                     selection.unsupervised);
    write_pairs_file((root / "submission.csv").string(), result.submission);
    write_file(root / "eval.txt",
               [&](std::ostream& o) { write_eval_block(o, result.final_report); });
    std::vector<int64_t> curve_ks;
    for (const double f : {0.25, 0.5, 0.75, 1.0}) {
      const auto kk = static_cast<int64_t>(std::llround(f * static_cast<double>(n_final)));
      if (kk > 0 && (curve_ks.empty() || kk > curve_ks.back())) curve_ks.push_back(kk);
    }
    write_file(root / "eval_curve.txt", [&](std::ostream& o) {
      write_eval_lines(o, f1_curve(result.submission, p3.truth, curve_ks));
    });
    write_file(root / "ablation.tsv", [&](std::ostream& o) {
      write_ablation_report(o, result.ablations);
      write_ablation_report(o, result.baselines);
    });
    write_file(root / "recall_heldout.tsv",
               [&](std::ostream& o) { write_recall_report(o, result.heldout_recall); });
  }
  return result;
}

void write_ablation_report(std::ostream& out, const std::vector<AblationRow>& rows) {
  for (const auto& r : rows) {
    out << r.name << '\t' << r.report.k << '\t' << r.report.precision << '\t'
        << r.report.recall << '\t' << r.report.f1 << '\t' << r.report.true_positives
        << '\n';
  }
}

}  // namespace xdm

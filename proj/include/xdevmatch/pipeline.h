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

// End-to-end orchestration: representations, per-partition candidates,
// scorer on train1, voter on train2, final selection on the held-out users.

#ifndef XDEVMATCH_PIPELINE_H_
#define XDEVMATCH_PIPELINE_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "xdevmatch/candidates.h"
#include "xdevmatch/classify.h"
#include "xdevmatch/embed.h"
#include "xdevmatch/evaluate.h"
#include "xdevmatch/infer.h"
#include "xdevmatch/ingest.h"
#include "xdevmatch/pairfeat.h"
#include "xdevmatch/synth.h"
#include "xdevmatch/vectorize.h"

namespace xdm {

struct PipelineConfig {
  int tfidf_min_count = 5;
  EmbedConfig embed;
  int k = 18;
  std::vector<int> recall_ks = {1, 2, 3, 5, 8, 12, 18, 25, 32};
  // Representations whose neighbor lists feed the candidate union and the
  // recall curve; empty means all nine. Rank features always use all nine.
  std::vector<std::string> knn_sources;
  double neg_ratio = 5.0;
  uint64_t sample_seed = 1;
  GbdtParams scorer;
  GbdtParams voter;
  // Top pairs of train2 fed to blind inference, as a multiple of the
  // train2 truth size.
  double voter_input_ratio = 1.0;
  double sup_ratio = 0.375;
  double unsup_ratio = 0.667;
  // Submission size; 0 means the held-out truth size.
  int64_t n_final = 0;
  double alpha = 0.5;
  int beta = 5;
  int workers = 1;
  bool deterministic = false;

  void validate() const;
  // Forces single-worker training and search.
  void force_deterministic();
};

// The nine user representations shared by every partition.
struct Representations {
  std::vector<TfidfModel> tfidf;        // h = 0..3
  std::vector<EmbeddingModel> embeddings;  // h = 0..3, title

  // Names in FeatureSchema::standard_representations() order.
  static std::vector<std::string> names();
};

Representations build_representations(const std::vector<UserLog>& logs,
                                      const PipelineConfig& cfg);

// Artifact files tfidf_h<h>.bin and emb_<tag>.bin inside `dir`.
void save_tfidf_models(const std::string& dir, const std::vector<TfidfModel>& models);
void save_embedding_models(const std::string& dir,
                           const std::vector<EmbeddingModel>& models);
Representations load_representations(const std::string& dir);

// Users of `p` in sorted order.
std::vector<UserId> partition_users(const SplitMap& splits, Partition p);
// Truth pairs with both endpoints in `p`.
PairSet partition_truth(const std::vector<CandidatePair>& truth,
                        const SplitMap& splits, Partition p);

// KNN within `users` for all nine representations.
NeighborBundle partition_neighbors(const Representations& reps,
                                   const std::vector<UserId>& users, int k,
                                   int workers);

// Maps of `bundle` named in `sources` (all maps when empty). Raises Error
// on an unknown name.
std::vector<const NeighborMap*> select_sources(const NeighborBundle& bundle,
                                               const std::vector<std::string>& sources);

// Feature context over one partition's neighbor lists. Keeps pointers into
// `reps` and `bundle`.
FeatureContext make_feature_context(const Representations& reps,
                                    const NeighborBundle& bundle,
                                    const std::vector<UserLog>& logs, int k);

// Baseline ranking: union of the given neighbor maps, ordered by the mean
// cosine over the same representations.
std::vector<ScoredPair> knn_baseline(const Representations& reps,
                                     const NeighborBundle& bundle,
                                     const std::vector<size_t>& rep_indices,
                                     int k);

struct AblationRow {
  std::string name;
  EvalReport report;
};

struct PipelineResult {
  std::vector<CandidatePair> submission;
  EvalReport final_report;
  std::vector<AblationRow> ablations;  // inference variants
  std::vector<AblationRow> baselines;  // unsupervised KNN rankings
  std::vector<std::pair<int, double>> heldout_recall;
  std::map<std::string, double> importance;
  double heldout_auc = 0.0;
  size_t voter_pairs = 0;
  size_t voter_pairs_outside_candidates = 0;
  SelectionParams selection;
};

// Runs every stage in memory. When `out_dir` is non-empty, writes all
// artifacts and reports there.
PipelineResult run_pipeline(const std::vector<UserLog>& logs,
                            const std::vector<CandidatePair>& truth,
                            const SplitMap& splits, const PipelineConfig& cfg,
                            const std::string& out_dir = "");

void write_ablation_report(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace xdm

#endif  // XDEVMATCH_PIPELINE_H_

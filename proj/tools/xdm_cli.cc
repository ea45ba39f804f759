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

// xdm: command-line driver. Every stage reads and writes artifacts inside
// the --out workspace directory.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "xdevmatch/config.h"
#include "xdevmatch/pipeline.h"

namespace fs = std::filesystem;

namespace {

using namespace xdm;

struct Globals {
  std::string config_path;
  std::optional<uint64_t> seed;
  bool deterministic = false;
  std::string out = "xdm_out";
};

struct Inputs {
  std::string events;
  std::string truth;
  std::string splits;
  std::string partition;
  std::string mode = "blind";
  int64_t top = 0;
  std::string submission;
  int64_t k = 0;
};

AppConfig resolve_config(const Globals& g) {
  AppConfig cfg = g.config_path.empty() ? AppConfig{} : load_config(g.config_path);
  if (g.seed) apply_seed(cfg, *g.seed);
  if (g.deterministic) cfg.pipeline.force_deterministic();
  cfg.pipeline.validate();
  return cfg;
}

std::string in_workspace(const Globals& g, const std::string& name) {
  return (fs::path(g.out) / name).string();
}

std::string or_default(const std::string& given, const Globals& g,
                       const std::string& name) {
  return given.empty() ? in_workspace(g, name) : given;
}

template <typename Fn>
void write_to(const std::string& path, Fn&& fn, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open " + path + " for writing");
  fn(out);
  if (!out) throw Error("write failed: " + path);
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("missing artifact " + path);
  return in;
}

std::vector<Partition> selected_partitions(const std::string& name) {
  if (name.empty()) return {Partition::kTrain1, Partition::kTrain2, Partition::kHeldout};
  return {parse_partition(name)};
}

Partition single_partition(const std::string& name, Partition fallback) {
  return name.empty() ? fallback : parse_partition(name);
}

std::string part_file(const std::string& stem, Partition p, const std::string& ext) {
  return stem + "_" + std::string(partition_name(p)) + ext;
}

struct Workspace {
  std::vector<UserLog> logs;
  std::vector<CandidatePair> truth;
  SplitMap splits;
};

Workspace load_workspace(const Globals& g, bool need_truth) {
  Workspace w;
  w.logs = parse_events_file(in_workspace(g, "events.tsv"));
  w.splits = read_splits_file(in_workspace(g, "splits.tsv"));
  if (need_truth) w.truth = read_pairs_file(in_workspace(g, "truth.csv"));
  return w;
}

NeighborBundle load_bundle(const Globals& g, Partition p) {
  auto in = open_in(in_workspace(g, part_file("neighbors", p, ".bin")), true);
  return read_neighbor_artifact(in);
}

std::vector<ScoredPair> load_scored(const Globals& g, Partition p) {
  auto in = open_in(in_workspace(g, part_file("scored", p, ".csv")));
  return read_scored_pairs(in);
}

PairClassifier load_classifier(const Globals& g, const std::string& name) {
  auto in = open_in(in_workspace(g, name), true);
  return read_classifier_artifact(in);
}

void print_report(const EvalReport& r) {
  write_eval_lines(std::cout, {r});
  write_eval_block(std::cout, r);
}

void cmd_gen_synth(const Globals& g) {
  const AppConfig cfg = resolve_config(g);
  const auto data = generate_dataset(cfg.synth);
  write_dataset(g.out, data, cfg.synth);
  std::cout << "users=" << data.logs.size() << " truth_pairs=" << data.truth.size()
            << " out=" << g.out << '\n';
}

void cmd_ingest(const Globals& g, const Inputs& in) {
  const AppConfig cfg = resolve_config(g);
  fs::create_directories(g.out);
  const auto events_path = or_default(in.events, g, "events.tsv");
  const auto logs = parse_events_file(events_path);
  size_t n_events = 0;
  for (const auto& l : logs) n_events += l.events.size();
  const auto target = in_workspace(g, "events.tsv");
  if (!fs::exists(target) || !fs::equivalent(events_path, target)) {
    write_to(target, [&](std::ostream& o) { write_events(o, logs); });
  }
  if (!in.truth.empty()) {
    const auto truth = read_pairs_file(in.truth);
    write_pairs_file(in_workspace(g, "truth.csv"), truth);
    if (in.splits.empty()) {
      std::vector<UserId> users;
      for (const auto& p : truth) {
        users.push_back(p.a());
        users.push_back(p.b());
      }
      const auto split = split_users(users, cfg.synth.split_train1,
                                     cfg.synth.split_train2, cfg.synth.seed);
      SplitMap map;
      for (const auto& l : logs) map[l.user_id] = Partition::kHeldout;
      for (const auto& u : split.train1) map[u] = Partition::kTrain1;
      for (const auto& u : split.train2) map[u] = Partition::kTrain2;
      write_to(in_workspace(g, "splits.tsv"), [&](std::ostream& o) { write_splits(o, map); });
    }
  }
  if (!in.splits.empty()) {
    const auto map = read_splits_file(in.splits);
    write_to(in_workspace(g, "splits.tsv"), [&](std::ostream& o) { write_splits(o, map); });
  }
  std::cout << "users=" << logs.size() << " events=" << n_events << '\n';
}

void cmd_tfidf(const Globals& g) {
  const AppConfig cfg = resolve_config(g);
  const auto logs = parse_events_file(in_workspace(g, "events.tsv"));
  std::vector<TfidfModel> models;
  for (int h = 0; h < HierLevel::kCount; ++h) {
    models.push_back(
        build_tfidf(build_user_documents(logs, HierLevel(h)), cfg.pipeline.tfidf_min_count));
    std::cout << "tfidf_h" << h << " vocabulary=" << models.back().vocab.size() << '\n';
  }
  save_tfidf_models(g.out, models);
}

void cmd_embed(const Globals& g) {
  const AppConfig cfg = resolve_config(g);
  const auto logs = parse_events_file(in_workspace(g, "events.tsv"));
  const auto models = embedding_ensemble(logs, cfg.pipeline.embed);
  for (const auto& m : models) {
    std::cout << "emb_" << tag_name(m.tag) << " users=" << m.users.size()
              << " tokens=" << m.tokens.size() << " final_loss="
              << (m.epoch_loss.empty() ? 0.0 : m.epoch_loss.back()) << '\n';
  }
  save_embedding_models(g.out, models);
}

void cmd_knn(const Globals& g, const Inputs& in) {
  const AppConfig cfg = resolve_config(g);
  const auto& p = cfg.pipeline;
  const auto reps = load_representations(g.out);
  const auto splits = read_splits_file(in_workspace(g, "splits.tsv"));
  std::vector<CandidatePair> truth;
  if (fs::exists(in_workspace(g, "truth.csv"))) {
    truth = read_pairs_file(in_workspace(g, "truth.csv"));
  }
  int k_search = p.k;
  for (const int r : p.recall_ks) k_search = std::max(k_search, r);
  for (const auto part : selected_partitions(in.partition)) {
    const auto users = partition_users(splits, part);
    const auto bundle = partition_neighbors(reps, users, k_search, p.workers);
    write_to(in_workspace(g, part_file("neighbors", part, ".bin")),
             [&](std::ostream& o) { write_neighbor_artifact(o, bundle); }, true);
    const auto set = union_candidates(select_sources(bundle, p.knn_sources), p.k);
    write_pairs_file(in_workspace(g, part_file("candidates", part, ".csv")),
                     std::vector<CandidatePair>(set.begin(), set.end()));
    std::cout << partition_name(part) << " users=" << users.size()
              << " candidates=" << set.size();
    const auto pt = partition_truth(truth, splits, part);
    if (!pt.empty()) {
      const auto curve = recall_at_k(select_sources(bundle, p.knn_sources), pt, p.recall_ks);
      write_to(in_workspace(g, part_file("recall", part, ".tsv")),
               [&](std::ostream& o) { write_recall_report(o, curve); });
      std::cout << " truth=" << pt.size();
    }
    std::cout << '\n';
  }
}

void cmd_features(const Globals& g, const Inputs& in) {
  const AppConfig cfg = resolve_config(g);
  const auto& p = cfg.pipeline;
  const auto ws = load_workspace(g, true);
  const auto reps = load_representations(g.out);
  for (const auto part : selected_partitions(in.partition)) {
    const auto bundle = load_bundle(g, part);
    const auto ctx = make_feature_context(reps, bundle, ws.logs, p.k);
    const auto cands = read_pairs_file(in_workspace(g, part_file("candidates", part, ".csv")));
    std::vector<CandidatePair> pairs;
    if (part == Partition::kTrain1) {
      const std::set<CandidatePair> pool(cands.begin(), cands.end());
      for (const auto& lp :
           sample_training_pairs(partition_users(ws.splits, part), pool,
                                 partition_truth(ws.truth, ws.splits, part),
                                 p.neg_ratio, p.sample_seed)) {
        pairs.push_back(lp.pair);
      }
    } else {
      pairs = cands;
    }
    FeatureMatrix m{ctx.schema(), pairs, ctx.assemble_all(pairs, p.workers)};
    write_to(in_workspace(g, part_file("features", part, ".csv")),
             [&](std::ostream& o) { write_feature_matrix(o, m); });
    std::cout << partition_name(part) << " rows=" << m.rows.size() << '\n';
  }
}

void cmd_train_scorer(const Globals& g) {
  const AppConfig cfg = resolve_config(g);
  auto in = open_in(in_workspace(g, "features_train1.csv"));
  const auto m = read_feature_matrix(in);
  check_schema(FeatureSchema::standard(), m.schema);
  const auto truth_list = read_pairs_file(in_workspace(g, "truth.csv"));
  const PairSet truth(truth_list.begin(), truth_list.end());
  std::vector<int> labels;
  for (const auto& p : m.pairs) labels.push_back(truth.count(p) ? 1 : 0);
  const auto clf = train_gbdt(m.rows, labels, m.schema, cfg.pipeline.scorer);
  write_to(in_workspace(g, "scorer.bin"),
           [&](std::ostream& o) { write_classifier_artifact(o, clf); }, true);
  write_to(in_workspace(g, "importance.tsv"), [&](std::ostream& o) {
    write_importance_report(o, feature_importance(clf));
  });
  std::cout << "rows=" << m.rows.size() << " trees=" << clf.trees.size()
            << " train_logloss="
            << (clf.telemetry.round_logloss.empty() ? clf.telemetry.initial_logloss
                                                    : clf.telemetry.round_logloss.back())
            << '\n';
}

void cmd_score(const Globals& g, const Inputs& in) {
  const auto clf = load_classifier(g, "scorer.bin");
  for (const auto part : selected_partitions(in.partition)) {
    if (in.partition.empty() && part == Partition::kTrain1) continue;
    auto fin = open_in(in_workspace(g, part_file("features", part, ".csv")));
    const auto m = read_feature_matrix(fin);
    const auto scored = score_pairs(clf, m.schema, m.pairs, m.rows);
    write_to(in_workspace(g, part_file("scored", part, ".csv")),
             [&](std::ostream& o) { write_scored_pairs(o, scored); });
    std::cout << partition_name(part) << " scored=" << scored.size() << '\n';
  }
}

FeatureSource source_for(const FeatureContext& ctx) {
  return [&ctx](const CandidatePair& p) { return ctx.assemble(p); };
}

void cmd_train_voter(const Globals& g) {
  const AppConfig cfg = resolve_config(g);
  const auto& p = cfg.pipeline;
  const auto ws = load_workspace(g, true);
  const auto reps = load_representations(g.out);
  const auto bundle = load_bundle(g, Partition::kTrain2);
  const auto ctx = make_feature_context(reps, bundle, ws.logs, p.k);
  const auto scored = load_scored(g, Partition::kTrain2);
  const auto truth = partition_truth(ws.truth, ws.splits, Partition::kTrain2);
  const auto n = std::min(scored.size(), static_cast<size_t>(std::llround(
                                             p.voter_input_ratio * truth.size())));
  const std::vector<ScoredPair> top(scored.begin(), scored.begin() + n);
  const auto training = train_voter(top, truth, source_for(ctx), ctx.schema(), p.voter);
  write_to(in_workspace(g, "voter.bin"),
           [&](std::ostream& o) { write_classifier_artifact(o, training.voter); }, true);
  std::vector<CandidatePair> extended;
  for (const auto& lp : training.data) extended.push_back(lp.pair);
  write_pairs_file(in_workspace(g, "extended_train2_blind.csv"), extended);
  std::cout << "input=" << n << " voter_pairs=" << extended.size() << '\n';
}

SelectionParams budget(const AppConfig& cfg, const Workspace& ws, Partition part,
                       size_t available) {
  const auto& p = cfg.pipeline;
  size_t n_final = static_cast<size_t>(p.n_final);
  if (n_final == 0) n_final = partition_truth(ws.truth, ws.splits, part).size();
  if (n_final == 0) throw Error("select: set select.n_final when no truth is available");
  auto sel = SelectionParams::from_budget(n_final, available, p.sup_ratio, p.unsup_ratio);
  sel.alpha = p.alpha;
  sel.beta = p.beta;
  return sel;
}

Workspace load_workspace_optional_truth(const Globals& g) {
  return load_workspace(g, fs::exists(in_workspace(g, "truth.csv")));
}

void cmd_infer(const Globals& g, const Inputs& in) {
  const AppConfig cfg = resolve_config(g);
  const auto part = single_partition(in.partition, Partition::kHeldout);
  const auto scored = load_scored(g, part);
  size_t top = in.top > 0 ? static_cast<size_t>(in.top) : scored.size();
  top = std::min(top, scored.size());
  const std::vector<ScoredPair> head(scored.begin(), scored.begin() + top);

  InferenceStats stats;
  std::vector<CandidatePair> extended;
  if (in.mode == "blind") {
    extended = merge_inference(head, MergeCondition::blind(), {}, &stats);
  } else if (in.mode == "unsupervised") {
    extended = merge_inference(head, MergeCondition::unsupervised(cfg.pipeline.beta), {},
                               &stats);
  } else if (in.mode == "supervised") {
    const auto ws = load_workspace_optional_truth(g);
    const auto reps = load_representations(g.out);
    const auto bundle = load_bundle(g, part);
    const auto ctx = make_feature_context(reps, bundle, ws.logs, cfg.pipeline.k);
    const auto voter = load_classifier(g, "voter.bin");
    extended = merge_inference(head, MergeCondition::supervised(&voter, cfg.pipeline.alpha),
                               source_for(ctx), &stats);
  } else {
    throw Error("infer: unknown mode " + in.mode);
  }
  write_pairs_file(in_workspace(g, "extended_" + std::string(partition_name(part)) + "_" +
                                       in.mode + ".csv"),
                   extended);
  std::cout << "input=" << top << " extended=" << extended.size()
            << " merges=" << stats.merges << " rejected=" << stats.rejected
            << " max_cluster=" << stats.max_cluster_size << '\n';
}

void cmd_select(const Globals& g, const Inputs& in) {
  const AppConfig cfg = resolve_config(g);
  const auto part = single_partition(in.partition, Partition::kHeldout);
  const auto ws = load_workspace_optional_truth(g);
  const auto reps = load_representations(g.out);
  const auto bundle = load_bundle(g, part);
  const auto ctx = make_feature_context(reps, bundle, ws.logs, cfg.pipeline.k);
  const auto voter = load_classifier(g, "voter.bin");
  const auto scored = load_scored(g, part);
  const auto sel = budget(cfg, ws, part, scored.size());
  const auto result = final_selection(scored, &voter, source_for(ctx), sel);
  write_pairs_file(in_workspace(g, "submission.csv"), result.submission);
  const std::string p = std::string(partition_name(part));
  write_pairs_file(in_workspace(g, "extended_" + p + "_supervised.csv"), result.supervised);
  write_pairs_file(in_workspace(g, "extended_" + p + "_unsupervised.csv"),
                   result.unsupervised);
  std::cout << "n_sup=" << sel.n_sup << " n_unsup=" << sel.n_unsup
            << " n_final=" << sel.n_final << " submission=" << result.submission.size()
            << '\n';
}

void cmd_evaluate(const Globals& g, const Inputs& in) {
  const auto submission = read_pairs_file(or_default(in.submission, g, "submission.csv"));
  const auto truth_list = read_pairs_file(or_default(in.truth, g, "truth.csv"));
  PairSet truth;
  const auto splits_path = or_default(in.splits, g, "splits.tsv");
  if (!in.partition.empty()) {
    truth = partition_truth(truth_list, read_splits_file(splits_path),
                            parse_partition(in.partition));
  } else {
    truth.insert(truth_list.begin(), truth_list.end());
  }
  const int64_t k = in.k > 0 ? in.k : static_cast<int64_t>(truth.size());
  const auto report = score_submission(submission, truth, k);
  if (report.clamped) {
    std::cerr << "xdm: warning: k=" << k << " exceeds submission size "
              << submission.size() << "; scoring " << report.predicted << " pairs\n";
  }
  print_report(report);
  fs::create_directories(g.out);
  write_to(in_workspace(g, "eval.txt"), [&](std::ostream& o) { write_eval_block(o, report); });
}

void cmd_pipeline(const Globals& g, const Inputs& in) {
  const AppConfig cfg = resolve_config(g);
  const auto start = std::chrono::steady_clock::now();
  std::vector<UserLog> logs;
  std::vector<CandidatePair> truth;
  SplitMap splits;
  if (in.events.empty()) {
    auto data = generate_dataset(cfg.synth);
    write_dataset(g.out, data, cfg.synth);
    logs = std::move(data.logs);
    truth = std::move(data.truth);
    splits = std::move(data.splits);
  } else {
    if (in.truth.empty() || in.splits.empty()) {
      throw Error("pipeline: --events needs --truth and --splits");
    }
    logs = parse_events_file(in.events);
    truth = read_pairs_file(in.truth);
    splits = read_splits_file(in.splits);
  }
  fs::create_directories(g.out);
  write_to(in_workspace(g, "config.ini"), [&](std::ostream& o) { write_config(o, cfg); });
  const auto r = run_pipeline(logs, truth, splits, cfg.pipeline, g.out);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  print_report(r.final_report);
  std::cout << "heldout_auc=" << r.heldout_auc << '\n';
  for (const auto& row : r.ablations) {
    std::cout << "ablation." << row.name << ".f1=" << row.report.f1 << '\n';
  }
  for (const auto& row : r.baselines) {
    std::cout << "baseline." << row.name << ".f1=" << row.report.f1 << '\n';
  }
  std::cout << "voter_pairs=" << r.voter_pairs
            << " outside_candidates=" << r.voter_pairs_outside_candidates << '\n'
            << "seconds=" << secs << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xdm: cross-device user matching from browsing logs"};
  app.require_subcommand(1);
  Globals g;
  Inputs in;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", g.config_path, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", g.seed, "master seed for every stochastic stage");
    sub->add_flag("--deterministic", g.deterministic, "single worker everywhere");
    sub->add_option("--out", g.out, "workspace directory")->capture_default_str();
    return sub;
  };
  auto add_partition = [&](CLI::App* sub) {
    sub->add_option("--partition", in.partition, "train1, train2 or heldout");
  };

  auto* gen = add_common(app.add_subcommand("gen-synth", "write a synthetic dataset"));
  auto* ingest = add_common(app.add_subcommand("ingest", "validate events into the workspace"));
  ingest->add_option("--events", in.events, "events file");
  ingest->add_option("--truth", in.truth, "truth pairs file");
  ingest->add_option("--splits", in.splits, "splits file");
  auto* tfidf = add_common(app.add_subcommand("tfidf", "TF-IDF per hierarchy level"));
  auto* embed = add_common(app.add_subcommand("embed", "document embedding ensemble"));
  auto* knn = add_common(app.add_subcommand("knn", "neighbors and candidate pairs"));
  add_partition(knn);
  auto* features = add_common(app.add_subcommand("features", "pair feature matrices"));
  add_partition(features);
  auto* train_scorer = add_common(app.add_subcommand("train-scorer", "stage-1 classifier"));
  auto* score = add_common(app.add_subcommand("score", "rank candidates with the scorer"));
  add_partition(score);
  auto* train_voter = add_common(app.add_subcommand("train-voter", "stage-2 classifier"));
  auto* infer = add_common(app.add_subcommand("infer", "cluster-merging inference"));
  add_partition(infer);
  infer->add_option("--mode", in.mode, "blind, supervised or unsupervised")
      ->check(CLI::IsMember({"blind", "supervised", "unsupervised"}));
  infer->add_option("--top", in.top, "number of top scored pairs (default all)");
  auto* select = add_common(app.add_subcommand("select", "final submission"));
  add_partition(select);
  auto* evaluate = add_common(app.add_subcommand("evaluate", "precision, recall, F1 at k"));
  evaluate->add_option("--submission", in.submission, "submission pairs file");
  evaluate->add_option("--truth", in.truth, "truth pairs file");
  evaluate->add_option("--splits", in.splits, "splits file");
  evaluate->add_option("--k", in.k, "cutoff (default truth size)");
  add_partition(evaluate);
  auto* pipeline = add_common(app.add_subcommand("pipeline", "run every stage"));
  pipeline->add_option("--events", in.events, "events file (default: synthesize)");
  pipeline->add_option("--truth", in.truth, "truth pairs file");
  pipeline->add_option("--splits", in.splits, "splits file");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) cmd_gen_synth(g);
    else if (*ingest) cmd_ingest(g, in);
    else if (*tfidf) cmd_tfidf(g);
    else if (*embed) cmd_embed(g);
    else if (*knn) cmd_knn(g, in);
    else if (*features) cmd_features(g, in);
    else if (*train_scorer) cmd_train_scorer(g);
    else if (*score) cmd_score(g, in);
    else if (*train_voter) cmd_train_voter(g);
    else if (*infer) cmd_infer(g, in);
    else if (*select) cmd_select(g, in);
    else if (*evaluate) cmd_evaluate(g, in);
    else if (*pipeline) cmd_pipeline(g, in);
  } catch (const std::exception& e) {
    std::cerr << "xdm: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

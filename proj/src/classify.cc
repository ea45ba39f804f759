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

#include "xdevmatch/classify.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_set>

#include "xdevmatch/binio.h"

namespace xdm {
namespace {

constexpr char kClassifierMagic[] = "XDGB";
constexpr uint32_t kClassifierVersion = 1;

// Splits must improve the residual sum of squares by more than this.
constexpr double kMinSplitGain = 1e-12;

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double mean_logloss(const std::vector<double>& margins,
                    const std::vector<int>& labels) {
  double s = 0.0;
  for (size_t i = 0; i < margins.size(); ++i) {
    s += labels[i] ? softplus(-margins[i]) : softplus(margins[i]);
  }
  return s / static_cast<double>(margins.size());
}

struct NodeStats {
  int64_t count = 0;
  double grad = 0.0;
  double hess = 0.0;
};

struct SplitCandidate {
  double gain = 0.0;
  int32_t feature = -1;
  double threshold = 0.0;
};

struct ScanState {
  int64_t count = 0;
  double grad = 0.0;
  double last = 0.0;
};

double split_gain(double left_sum, int64_t left_n, double total_sum,
                  int64_t total_n) {
  const double right_sum = total_sum - left_sum;
  const int64_t right_n = total_n - left_n;
  return left_sum * left_sum / static_cast<double>(left_n) +
         right_sum * right_sum / static_cast<double>(right_n) -
         total_sum * total_sum / static_cast<double>(total_n);
}

// Level-wise exact greedy growth of one tree over the rows with
// node_of[i] >= 0. `columns[f][i]` is feature f of row i; `sorted[f]` lists
// rows in ascending order of that feature.
RegressionTree grow_tree(const std::vector<std::vector<double>>& columns,
                         const std::vector<std::vector<uint32_t>>& sorted,
                         const std::vector<double>& grad,
                         const std::vector<double>& hess,
                         std::vector<int32_t>& node_of,
                         const GbdtParams& params) {
  RegressionTree tree;
  tree.nodes.emplace_back();
  std::vector<NodeStats> stats(1);
  for (size_t i = 0; i < node_of.size(); ++i) {
    if (node_of[i] < 0) continue;
    ++stats[0].count;
    stats[0].grad += grad[i];
    stats[0].hess += hess[i];
  }

  std::vector<int32_t> frontier = {0};
  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    const size_t n_nodes = tree.nodes.size();
    std::vector<char> active(n_nodes, 0);
    for (const int32_t n : frontier) active[n] = 1;
    std::vector<SplitCandidate> best(n_nodes);
    std::vector<ScanState> scan(n_nodes);

    for (size_t f = 0; f < columns.size(); ++f) {
      const auto& col = columns[f];
      for (const int32_t n : frontier) scan[n] = ScanState{};
      for (const uint32_t i : sorted[f]) {
        const int32_t n = node_of[i];
        if (n < 0 || !active[n]) continue;
        ScanState& s = scan[n];
        const double x = col[i];
        if (s.count > 0 && x > s.last && s.count >= params.min_leaf &&
            stats[n].count - s.count >= params.min_leaf) {
          const double gain = split_gain(s.grad, s.count, stats[n].grad, stats[n].count);
          if (gain > best[n].gain) {
            double thr = s.last + (x - s.last) / 2.0;
            if (!(thr < x)) thr = s.last;
            best[n] = {gain, static_cast<int32_t>(f), thr};
          }
        }
        ++s.count;
        s.grad += grad[i];
        s.last = x;
      }
    }

    std::vector<int32_t> next;
    for (const int32_t n : frontier) {
      if (best[n].feature < 0 || best[n].gain <= kMinSplitGain) continue;
      auto& node = tree.nodes[n];
      node.feature = best[n].feature;
      node.threshold = best[n].threshold;
      node.gain = best[n].gain;
      node.left = static_cast<int32_t>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.resize(tree.nodes.size());
      next.push_back(tree.nodes[n].left);
      next.push_back(tree.nodes[n].right);
    }
    if (next.empty()) break;
    for (size_t i = 0; i < node_of.size(); ++i) {
      const int32_t n = node_of[i];
      if (n < 0 || tree.nodes[n].feature < 0 || tree.nodes[n].left < 0) continue;
      if (!active[n]) continue;
      const auto& node = tree.nodes[n];
      const int32_t child =
          columns[node.feature][i] <= node.threshold ? node.left : node.right;
      node_of[i] = child;
      ++stats[child].count;
      stats[child].grad += grad[i];
      stats[child].hess += hess[i];
    }
    frontier = std::move(next);
  }

  for (size_t n = 0; n < tree.nodes.size(); ++n) {
    auto& node = tree.nodes[n];
    if (node.feature >= 0) continue;
    const double h = std::max(stats[n].hess, 1e-16);
    node.value = params.learning_rate * stats[n].grad / h;
  }
  return tree;
}

void check_finite(std::span<const double> row) {
  for (const double x : row) {
    if (!std::isfinite(x)) throw Error("train_gbdt: non-finite feature value");
  }
}

}  // namespace

std::vector<LabeledPair> sample_training_pairs(
    const std::vector<UserId>& train_users,
    const std::set<CandidatePair>& candidates, const PairSet& truth,
    double neg_ratio, uint64_t seed) {
  if (neg_ratio < 0) throw Error("sample_training_pairs: neg_ratio must be >= 0");
  const std::unordered_set<UserId> members(train_users.begin(), train_users.end());
  auto inside = [&](const CandidatePair& p) {
    return members.count(p.a()) && members.count(p.b());
  };

  std::vector<LabeledPair> out;
  for (const auto& p : truth) {
    if (inside(p)) out.push_back({p, {}, 1, candidates.count(p) > 0});
  }
  if (out.empty()) throw Error("sample_training_pairs: no positive pairs");

  std::vector<CandidatePair> negatives;
  for (const auto& p : candidates) {
    if (!truth.count(p) && inside(p)) negatives.push_back(p);
  }
  const auto cap = static_cast<size_t>(
      std::floor(neg_ratio * static_cast<double>(out.size()) + 1e-9));
  if (negatives.size() > cap) {
    std::mt19937_64 rng(seed);
    std::shuffle(negatives.begin(), negatives.end(), rng);
    negatives.erase(negatives.begin() + static_cast<std::ptrdiff_t>(cap),
                    negatives.end());
  }
  for (auto& p : negatives) out.push_back({std::move(p), {}, 0, true});
  std::sort(out.begin(), out.end(), [](const LabeledPair& x, const LabeledPair& y) {
    return x.pair < y.pair;
  });
  return out;
}

void GbdtParams::validate() const {
  if (n_trees < 0) throw Error("gbdt: n_trees must be >= 0");
  if (max_depth < 1) throw Error("gbdt: max_depth must be >= 1");
  if (!(learning_rate > 0)) throw Error("gbdt: learning_rate must be > 0");
  if (min_leaf < 1) throw Error("gbdt: min_leaf must be >= 1");
  if (!(subsample > 0 && subsample <= 1)) {
    throw Error("gbdt: subsample must be in (0, 1]");
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  int32_t n = 0;
  while (nodes[n].feature >= 0) {
    n = x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
  }
  return nodes[n].value;
}

double PairClassifier::margin(std::span<const double> x) const {
  if (x.size() != schema.size()) {
    throw Error("classifier: expected " + std::to_string(schema.size()) +
                " features, got " + std::to_string(x.size()));
  }
  double m = base_score;
  for (const auto& t : trees) m += t.predict(x);
  return m;
}

double PairClassifier::predict(std::span<const double> x) const {
  return sigmoid(margin(x));
}

PairClassifier train_gbdt(const std::vector<FeatureVector>& rows,
                          const std::vector<int>& labels,
                          const FeatureSchema& schema, const GbdtParams& params) {
  params.validate();
  if (rows.empty()) throw Error("train_gbdt: empty training data");
  if (rows.size() != labels.size()) throw Error("train_gbdt: label count mismatch");
  const size_t n = rows.size();
  const size_t n_features = schema.size();
  int64_t positives = 0;
  for (size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n_features) throw Error("train_gbdt: row length mismatch");
    check_finite(rows[i]);
    if (labels[i] != 0 && labels[i] != 1) throw Error("train_gbdt: labels must be 0/1");
    positives += labels[i];
  }
  if (positives == 0 || positives == static_cast<int64_t>(n)) {
    throw Error("train_gbdt: training data must contain both classes");
  }

  std::vector<std::vector<double>> columns(n_features, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t f = 0; f < n_features; ++f) columns[f][i] = rows[i][f];
  }
  std::vector<std::vector<uint32_t>> sorted(n_features, std::vector<uint32_t>(n));
  for (size_t f = 0; f < n_features; ++f) {
    auto& order = sorted[f];
    std::iota(order.begin(), order.end(), 0u);
    const auto& col = columns[f];
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return col[a] < col[b]; });
  }

  PairClassifier clf;
  clf.schema = schema;
  clf.params = params;
  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  clf.base_score = std::log(rate / (1.0 - rate));

  std::vector<double> margins(n, clf.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<int32_t> node_of(n);
  std::mt19937_64 rng(params.seed);
  std::vector<uint32_t> rows_idx(n);
  std::iota(rows_idx.begin(), rows_idx.end(), 0u);
  const auto sample_n = std::max<size_t>(
      1, static_cast<size_t>(std::floor(params.subsample * static_cast<double>(n))));
  clf.telemetry.initial_logloss = mean_logloss(margins, labels);

  for (int t = 0; t < params.n_trees; ++t) {
    for (size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margins[i]);
      grad[i] = labels[i] - p;
      hess[i] = p * (1.0 - p);
    }
    if (sample_n < n) {
      std::shuffle(rows_idx.begin(), rows_idx.end(), rng);
      std::fill(node_of.begin(), node_of.end(), -1);
      for (size_t s = 0; s < sample_n; ++s) node_of[rows_idx[s]] = 0;
    } else {
      std::fill(node_of.begin(), node_of.end(), 0);
    }
    RegressionTree tree = grow_tree(columns, sorted, grad, hess, node_of, params);
    for (const auto& node : tree.nodes) clf.telemetry.total_gain += node.gain;
    for (size_t i = 0; i < n; ++i) margins[i] += tree.predict(rows[i]);
    clf.trees.push_back(std::move(tree));
    clf.telemetry.round_logloss.push_back(mean_logloss(margins, labels));
  }
  return clf;
}

PairClassifier train_gbdt(const std::vector<LabeledPair>& data,
                          const FeatureSchema& schema, const GbdtParams& params) {
  std::vector<FeatureVector> rows;
  std::vector<int> labels;
  rows.reserve(data.size());
  labels.reserve(data.size());
  for (const auto& d : data) {
    rows.push_back(d.features);
    labels.push_back(d.label);
  }
  return train_gbdt(rows, labels, schema, params);
}

std::vector<ScoredPair> score_pairs(const PairClassifier& clf,
                                    const FeatureSchema& schema,
                                    const std::vector<CandidatePair>& pairs,
                                    const std::vector<FeatureVector>& features) {
  check_schema(clf.schema, schema);
  if (pairs.size() != features.size()) {
    throw Error("score_pairs: pair/feature count mismatch");
  }
  std::vector<ScoredPair> out;
  out.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    out.push_back({pairs[i], clf.predict(features[i])});
  }
  std::sort(out.begin(), out.end(), [](const ScoredPair& x, const ScoredPair& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.pair < y.pair;
  });
  return out;
}

std::map<std::string, double> feature_importance(const PairClassifier& clf) {
  std::map<std::string, double> out;
  for (const auto& name : clf.schema.names()) out[name] = 0.0;
  for (const auto& tree : clf.trees) {
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0) out[clf.schema.names()[node.feature]] += node.gain;
    }
  }
  return out;
}

void write_importance_report(std::ostream& out,
                             const std::map<std::string, double>& importance) {
  std::vector<std::pair<std::string, double>> rows(importance.begin(),
                                                   importance.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    return x.second > y.second;
  });
  for (const auto& [name, gain] : rows) out << name << '\t' << gain << '\n';
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("roc_auc: size mismatch");
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  int64_t pos = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const int64_t neg = static_cast<int64_t>(scores.size()) - pos;
  if (pos == 0 || neg == 0) throw Error("roc_auc: need both classes");
  return (rank_sum - static_cast<double>(pos) * (pos + 1) / 2.0) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

void write_classifier_artifact(std::ostream& out, const PairClassifier& clf) {
  binio::Writer w(out);
  w.header(kClassifierMagic, kClassifierVersion);
  const auto& p = clf.params;
  w.put<int32_t>(p.n_trees);
  w.put<int32_t>(p.max_depth);
  w.put<double>(p.learning_rate);
  w.put<int32_t>(p.min_leaf);
  w.put<double>(p.subsample);
  w.put<uint64_t>(p.seed);
  w.put_strings(clf.schema.names());
  w.put<double>(clf.base_score);
  w.put<uint64_t>(clf.trees.size());
  for (const auto& tree : clf.trees) {
    w.put<uint64_t>(tree.nodes.size());
    for (const auto& n : tree.nodes) {
      w.put<int32_t>(n.feature);
      w.put<double>(n.threshold);
      w.put<int32_t>(n.left);
      w.put<int32_t>(n.right);
      w.put<double>(n.value);
      w.put<double>(n.gain);
    }
  }
  w.put<double>(clf.telemetry.initial_logloss);
  w.put_span<double>(clf.telemetry.round_logloss);
  w.put<double>(clf.telemetry.total_gain);
  w.check();
}

PairClassifier read_classifier_artifact(std::istream& in) {
  binio::Reader r(in);
  r.expect_header(kClassifierMagic, kClassifierVersion);
  PairClassifier clf;
  auto& p = clf.params;
  p.n_trees = r.get<int32_t>();
  p.max_depth = r.get<int32_t>();
  p.learning_rate = r.get<double>();
  p.min_leaf = r.get<int32_t>();
  p.subsample = r.get<double>();
  p.seed = r.get<uint64_t>();
  clf.schema = FeatureSchema(r.get_strings());
  clf.base_score = r.get<double>();
  const auto n_trees = r.get<uint64_t>();
  const auto n_features = static_cast<int32_t>(clf.schema.size());
  for (uint64_t t = 0; t < n_trees; ++t) {
    RegressionTree tree;
    const auto n_nodes = r.get<uint64_t>();
    if (n_nodes == 0) throw Error("classifier artifact: empty tree");
    for (uint64_t i = 0; i < n_nodes; ++i) {
      TreeNode n;
      n.feature = r.get<int32_t>();
      n.threshold = r.get<double>();
      n.left = r.get<int32_t>();
      n.right = r.get<int32_t>();
      n.value = r.get<double>();
      n.gain = r.get<double>();
      const auto limit = static_cast<int32_t>(n_nodes);
      if (n.feature >= n_features ||
          (n.feature >= 0 && (n.left <= static_cast<int32_t>(i) || n.left >= limit ||
                              n.right <= static_cast<int32_t>(i) || n.right >= limit))) {
        throw Error("classifier artifact: malformed tree node");
      }
      tree.nodes.push_back(n);
    }
    clf.trees.push_back(std::move(tree));
  }
  clf.telemetry.initial_logloss = r.get<double>();
  clf.telemetry.round_logloss = r.get_vector<double>();
  clf.telemetry.total_gain = r.get<double>();
  return clf;
}

void write_scored_pairs(std::ostream& out, const std::vector<ScoredPair>& pairs) {
  std::string line;
  char buf[32];
  for (const auto& sp : pairs) {
    line = sp.pair.a();
    line += ',';
    line += sp.pair.b();
    line += ',';
    const auto res = std::to_chars(buf, buf + sizeof(buf), sp.score);
    line.append(buf, res.ptr);
    out << line << '\n';
  }
}

std::vector<ScoredPair> read_scored_pairs(std::istream& in) {
  std::vector<ScoredPair> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw Error("scored pairs line " + std::to_string(line_no) +
                  ": expected `a,b,score`");
    }
    double score = 0.0;
    const char* begin = line.data() + c2 + 1;
    const char* end = line.data() + line.size();
    const auto res = std::from_chars(begin, end, score);
    if (res.ec != std::errc() || res.ptr != end) {
      throw Error("scored pairs line " + std::to_string(line_no) + ": bad score");
    }
    out.push_back({CandidatePair(line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1)),
                   score});
  }
  return out;
}

}  // namespace xdm

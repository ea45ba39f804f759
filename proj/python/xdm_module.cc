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

// Python bindings. Pairs cross the boundary as (a, b) tuples and scored
// pairs as (a, b, score); configs are plain attribute bags.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "xdevmatch/config.h"
#include "xdevmatch/pipeline.h"

namespace py = pybind11;
using namespace xdm;

namespace {

using PyPair = std::pair<std::string, std::string>;

std::vector<CandidatePair> to_pairs(const std::vector<PyPair>& in) {
  std::vector<CandidatePair> out;
  out.reserve(in.size());
  for (const auto& [a, b] : in) out.emplace_back(a, b);
  return out;
}

std::vector<PyPair> from_pairs(const std::vector<CandidatePair>& in) {
  std::vector<PyPair> out;
  out.reserve(in.size());
  for (const auto& p : in) out.emplace_back(p.a(), p.b());
  return out;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["k"] = r.k;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["true_positives"] = r.true_positives;
  d["predicted"] = r.predicted;
  d["truth_size"] = r.truth_size;
  d["clamped"] = r.clamped;
  return d;
}

py::dict rows_dict(const std::vector<AblationRow>& rows) {
  py::dict d;
  for (const auto& r : rows) d[py::str(r.name)] = report_dict(r.report);
  return d;
}

MergeCondition condition(const std::string& mode, int beta) {
  if (mode == "blind") return MergeCondition::blind();
  if (mode == "unsupervised") return MergeCondition::unsupervised(beta);
  throw Error("mode must be 'blind' or 'unsupervised', got '" + mode + "'");
}

}  // namespace

PYBIND11_MODULE(_xdm, m) {
  m.doc() = "Cross-device user matching: synthetic data, pipeline and building blocks";

  py::register_exception<Error>(m, "XdmError", PyExc_ValueError);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n_personas", &SynthConfig::n_personas)
      .def_readwrite("devices_min", &SynthConfig::devices_min)
      .def_readwrite("devices_max", &SynthConfig::devices_max)
      .def_readwrite("events_min", &SynthConfig::events_min)
      .def_readwrite("events_max", &SynthConfig::events_max)
      .def_readwrite("n_domains", &SynthConfig::n_domains)
      .def_readwrite("paths_per_domain", &SynthConfig::paths_per_domain)
      .def_readwrite("pages_per_path", &SynthConfig::pages_per_path)
      .def_readwrite("title_vocab", &SynthConfig::title_vocab)
      .def_readwrite("title_fraction", &SynthConfig::title_fraction)
      .def_readwrite("topic_concentration", &SynthConfig::topic_concentration)
      .def_readwrite("n_communities", &SynthConfig::n_communities)
      .def_readwrite("community_weight", &SynthConfig::community_weight)
      .def_readwrite("device_drift", &SynthConfig::device_drift)
      .def_readwrite("cross_device_noise", &SynthConfig::cross_device_noise)
      .def_readwrite("time_habit_strength", &SynthConfig::time_habit_strength)
      .def_readwrite("device_habit_drift", &SynthConfig::device_habit_drift)
      .def_readwrite("split_train1", &SynthConfig::split_train1)
      .def_readwrite("split_train2", &SynthConfig::split_train2)
      .def_readwrite("start_time", &SynthConfig::start_time)
      .def_readwrite("days", &SynthConfig::days)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<EmbedConfig>(m, "EmbedConfig")
      .def(py::init<>())
      .def_readwrite("dim", &EmbedConfig::dim)
      .def_readwrite("window", &EmbedConfig::window)
      .def_readwrite("epochs", &EmbedConfig::epochs)
      .def_readwrite("negative_samples", &EmbedConfig::negative_samples)
      .def_readwrite("initial_lr", &EmbedConfig::initial_lr)
      .def_readwrite("final_lr", &EmbedConfig::final_lr)
      .def_readwrite("min_count", &EmbedConfig::min_count)
      .def_readwrite("seed", &EmbedConfig::seed)
      .def_readwrite("workers", &EmbedConfig::workers)
      .def_readwrite("train_words", &EmbedConfig::train_words);

  py::class_<GbdtParams>(m, "GbdtParams")
      .def(py::init<>())
      .def_readwrite("n_trees", &GbdtParams::n_trees)
      .def_readwrite("max_depth", &GbdtParams::max_depth)
      .def_readwrite("learning_rate", &GbdtParams::learning_rate)
      .def_readwrite("min_leaf", &GbdtParams::min_leaf)
      .def_readwrite("subsample", &GbdtParams::subsample)
      .def_readwrite("seed", &GbdtParams::seed);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("tfidf_min_count", &PipelineConfig::tfidf_min_count)
      .def_readwrite("embed", &PipelineConfig::embed)
      .def_readwrite("k", &PipelineConfig::k)
      .def_readwrite("recall_ks", &PipelineConfig::recall_ks)
      .def_readwrite("knn_sources", &PipelineConfig::knn_sources)
      .def_readwrite("neg_ratio", &PipelineConfig::neg_ratio)
      .def_readwrite("sample_seed", &PipelineConfig::sample_seed)
      .def_readwrite("scorer", &PipelineConfig::scorer)
      .def_readwrite("voter", &PipelineConfig::voter)
      .def_readwrite("voter_input_ratio", &PipelineConfig::voter_input_ratio)
      .def_readwrite("sup_ratio", &PipelineConfig::sup_ratio)
      .def_readwrite("unsup_ratio", &PipelineConfig::unsup_ratio)
      .def_readwrite("n_final", &PipelineConfig::n_final)
      .def_readwrite("alpha", &PipelineConfig::alpha)
      .def_readwrite("beta", &PipelineConfig::beta)
      .def_readwrite("workers", &PipelineConfig::workers)
      .def_readwrite("deterministic", &PipelineConfig::deterministic)
      .def("validate", &PipelineConfig::validate)
      .def("force_deterministic", &PipelineConfig::force_deterministic);

  py::class_<AppConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("synth", &AppConfig::synth)
      .def_readwrite("pipeline", &AppConfig::pipeline)
      .def("apply_seed", &apply_seed, py::arg("seed"))
      .def("to_ini", [](const AppConfig& c) {
        std::ostringstream out;
        write_config(out, c);
        return out.str();
      });

  m.def("load_config", &load_config, py::arg("path"), "Reads an INI config file.");
  m.def(
      "parse_config",
      [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in, "<string>");
      },
      py::arg("text"), "Parses INI config text.");

  py::class_<SynthDataset>(m, "Dataset")
      .def_property_readonly("users",
                             [](const SynthDataset& d) {
                               std::vector<std::string> out;
                               for (const auto& l : d.logs) out.push_back(l.user_id);
                               return out;
                             })
      .def_property_readonly("truth", [](const SynthDataset& d) { return from_pairs(d.truth); })
      .def_property_readonly("splits",
                             [](const SynthDataset& d) {
                               std::map<std::string, std::string> out;
                               for (const auto& [u, p] : d.splits) {
                                 out[u] = std::string(partition_name(p));
                               }
                               return out;
                             })
      .def_readonly("persona_of", &SynthDataset::persona_of)
      .def("event_count",
           [](const SynthDataset& d) {
             size_t n = 0;
             for (const auto& l : d.logs) n += l.events.size();
             return n;
           })
      .def(
          "write",
          [](const SynthDataset& d, const std::string& dir, const SynthConfig& cfg) {
            write_dataset(dir, d, cfg);
          },
          py::arg("dir"), py::arg("config"),
           "Writes events.tsv, truth.csv, splits.tsv and manifest.json.");

  m.def("generate_dataset", &generate_dataset, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "load_dataset",
      [](const std::string& events, const std::string& truth, const std::string& splits) {
        SynthDataset d;
        d.logs = parse_events_file(events);
        d.truth = read_pairs_file(truth);
        d.splits = read_splits_file(splits);
        return d;
      },
      py::arg("events"), py::arg("truth"), py::arg("splits"),
      "Reads an events/truth/splits triple from disk.");

  m.def(
      "run_pipeline",
      [](const SynthDataset& d, const PipelineConfig& cfg, const std::string& out_dir) {
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(d.logs, d.truth, d.splits, cfg, out_dir);
        }
        py::dict out;
        out["submission"] = from_pairs(r.submission);
        out["report"] = report_dict(r.final_report);
        out["ablations"] = rows_dict(r.ablations);
        out["baselines"] = rows_dict(r.baselines);
        out["heldout_recall"] = r.heldout_recall;
        out["heldout_auc"] = r.heldout_auc;
        out["importance"] = r.importance;
        out["voter_pairs"] = r.voter_pairs;
        out["voter_pairs_outside_candidates"] = r.voter_pairs_outside_candidates;
        return out;
      },
      py::arg("dataset"), py::arg("config") = PipelineConfig{}, py::arg("out_dir") = "",
      "Runs every stage; writes artifacts when out_dir is given.");

  m.def(
      "score_submission",
      [](const std::vector<PyPair>& predicted, const std::vector<PyPair>& truth,
         int64_t k) {
        const auto t = to_pairs(truth);
        return report_dict(score_submission(to_pairs(predicted), PairSet(t.begin(), t.end()),
                                            k < 0 ? static_cast<int64_t>(t.size()) : k));
      },
      py::arg("predicted"), py::arg("truth"), py::arg("k") = -1,
      "F1@k of a ranked submission; k defaults to the truth size.");
  m.def("f1_score", &f1_score, py::arg("precision"), py::arg("recall"));

  m.def(
      "token_at_level",
      [](const std::string& url, int h) {
        const auto parsed = parse_url(url);
        Event e;
        e.domain = parsed.domain;
        e.path_segments = parsed.path_segments;
        return token_at_level(e, HierLevel(h));
      },
      py::arg("url"), py::arg("level"));

  m.def(
      "symmetric_kl",
      [](const std::vector<int64_t>& p, const std::vector<int64_t>& q) {
        return symmetric_kl(p, q);
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "knn",
      [](const std::map<std::string, std::vector<float>>& vectors, int k) {
        if (vectors.empty()) throw Error("knn: no vectors");
        EmbeddingModel model;
        model.config.dim = static_cast<int>(vectors.begin()->second.size());
        for (const auto& [u, v] : vectors) {
          if (static_cast<int>(v.size()) != model.config.dim) {
            throw Error("knn: vector length mismatch for " + u);
          }
          model.users.push_back(u);
          model.user_matrix.insert(model.user_matrix.end(), v.begin(), v.end());
        }
        std::map<std::string, std::vector<std::pair<std::string, double>>> out;
        for (const auto& [q, list] : knn_dense(model, model.users, k)) {
          auto& row = out[q];
          for (const auto& n : list.neighbors) row.emplace_back(n.user, n.similarity);
        }
        return out;
      },
      py::arg("vectors"), py::arg("k"),
      "Exact cosine neighbors; ties go to the smaller user id.");

  m.def(
      "merge_inference",
      [](const std::vector<std::tuple<std::string, std::string, double>>& scored,
         const std::string& mode, int beta) {
        std::vector<ScoredPair> in;
        for (const auto& [a, b, s] : scored) in.push_back({{a, b}, s});
        return from_pairs(merge_inference(in, condition(mode, beta)));
      },
      py::arg("scored"), py::arg("mode") = "blind", py::arg("beta") = 5,
      "Cluster-merging inference over (a, b, score) triples sorted by score.");

  py::class_<PairClassifier>(m, "Classifier")
      .def_property_readonly("n_trees",
                             [](const PairClassifier& c) { return c.trees.size(); })
      .def_property_readonly("round_logloss",
                             [](const PairClassifier& c) { return c.telemetry.round_logloss; })
      .def("predict",
           [](const PairClassifier& c, const std::vector<std::vector<double>>& rows) {
             std::vector<double> out;
             out.reserve(rows.size());
             for (const auto& r : rows) out.push_back(c.predict(r));
             return out;
           })
      .def("importance", &feature_importance);

  m.def(
      "train_gbdt",
      [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
         const std::vector<std::string>& names, const GbdtParams& params) {
        py::gil_scoped_release release;
        return train_gbdt(rows, labels, FeatureSchema(names), params);
      },
      py::arg("rows"), py::arg("labels"), py::arg("feature_names"),
      py::arg("params") = GbdtParams{});
  m.def("roc_auc", [](const std::vector<double>& s, const std::vector<int>& l) {
    return roc_auc(s, l);
  }, py::arg("scores"), py::arg("labels"));
}

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

#include "xdevmatch/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace xdm {
namespace {

using Setter = std::function<void(const std::string&)>;

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error("config: bad value for " + key + ": '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error("config: bad boolean for " + key + ": '" + text + "'");
}

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) throw Error("config: empty entry in " + key);
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(key, text)) out.push_back(parse_number<int>(key, item));
  return out;
}

template <typename T>
void bind_key(std::map<std::string, Setter>& table, const std::string& key, T& field) {
  table[key] = [&field, key](const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      field = parse_bool(key, v);
    } else {
      field = parse_number<T>(key, v);
    }
  };
}

void bind_gbdt(std::map<std::string, Setter>& t, const std::string& s, GbdtParams& p) {
  bind_key(t, s + ".n_trees", p.n_trees);
  bind_key(t, s + ".max_depth", p.max_depth);
  bind_key(t, s + ".learning_rate", p.learning_rate);
  bind_key(t, s + ".min_leaf", p.min_leaf);
  bind_key(t, s + ".subsample", p.subsample);
  bind_key(t, s + ".seed", p.seed);
}

std::map<std::string, Setter> setters(AppConfig& c) {
  std::map<std::string, Setter> t;
  auto& s = c.synth;
  bind_key(t, "synth.n_personas", s.n_personas);
  bind_key(t, "synth.devices_min", s.devices_min);
  bind_key(t, "synth.devices_max", s.devices_max);
  bind_key(t, "synth.events_min", s.events_min);
  bind_key(t, "synth.events_max", s.events_max);
  bind_key(t, "synth.n_domains", s.n_domains);
  bind_key(t, "synth.paths_per_domain", s.paths_per_domain);
  bind_key(t, "synth.pages_per_path", s.pages_per_path);
  bind_key(t, "synth.title_vocab", s.title_vocab);
  bind_key(t, "synth.title_fraction", s.title_fraction);
  bind_key(t, "synth.topic_concentration", s.topic_concentration);
  bind_key(t, "synth.n_communities", s.n_communities);
  bind_key(t, "synth.community_weight", s.community_weight);
  bind_key(t, "synth.device_drift", s.device_drift);
  bind_key(t, "synth.cross_device_noise", s.cross_device_noise);
  bind_key(t, "synth.time_habit_strength", s.time_habit_strength);
  bind_key(t, "synth.device_habit_drift", s.device_habit_drift);
  bind_key(t, "synth.split_train1", s.split_train1);
  bind_key(t, "synth.split_train2", s.split_train2);
  bind_key(t, "synth.start_time", s.start_time);
  bind_key(t, "synth.days", s.days);
  bind_key(t, "synth.seed", s.seed);

  auto& p = c.pipeline;
  bind_key(t, "tfidf.min_count", p.tfidf_min_count);
  auto& e = p.embed;
  bind_key(t, "embed.dim", e.dim);
  bind_key(t, "embed.window", e.window);
  bind_key(t, "embed.epochs", e.epochs);
  bind_key(t, "embed.negative_samples", e.negative_samples);
  bind_key(t, "embed.initial_lr", e.initial_lr);
  bind_key(t, "embed.final_lr", e.final_lr);
  bind_key(t, "embed.min_count", e.min_count);
  bind_key(t, "embed.seed", e.seed);
  bind_key(t, "embed.workers", e.workers);
  bind_key(t, "embed.train_words", e.train_words);
  bind_key(t, "knn.k", p.k);
  t["knn.recall_ks"] = [&p](const std::string& v) {
    p.recall_ks = parse_int_list("knn.recall_ks", v);
  };
  t["knn.sources"] = [&p](const std::string& v) {
    p.knn_sources = split_list("knn.sources", v);
  };
  bind_key(t, "sample.neg_ratio", p.neg_ratio);
  bind_key(t, "sample.seed", p.sample_seed);
  bind_gbdt(t, "scorer", p.scorer);
  bind_gbdt(t, "voter", p.voter);
  bind_key(t, "voter.input_ratio", p.voter_input_ratio);
  bind_key(t, "select.sup_ratio", p.sup_ratio);
  bind_key(t, "select.unsup_ratio", p.unsup_ratio);
  bind_key(t, "select.n_final", p.n_final);
  bind_key(t, "select.alpha", p.alpha);
  bind_key(t, "select.beta", p.beta);
  bind_key(t, "pipeline.workers", p.workers);
  bind_key(t, "pipeline.deterministic", p.deterministic);
  return t;
}

}  // namespace

AppConfig parse_config(std::istream& in, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("config " + source + ": line " + std::to_string(e.line()) + ": " +
                e.message());
  }
  AppConfig cfg;
  auto table = setters(cfg);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error("config " + source + ": key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw Error("config " + source + ": unknown key " + full);
      it->second(value.get_value<std::string>());
    }
  }
  cfg.synth.validate();
  cfg.pipeline.validate();
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  return parse_config(in, path);
}

void write_config(std::ostream& out, const AppConfig& c) {
  const auto& s = c.synth;
  const auto& p = c.pipeline;
  const auto& e = p.embed;
  auto gbdt = [&](const char* name, const GbdtParams& g) {
    out << "[" << name << "]\n"
        << "n_trees = " << g.n_trees << "\nmax_depth = " << g.max_depth
        << "\nlearning_rate = " << g.learning_rate << "\nmin_leaf = " << g.min_leaf
        << "\nsubsample = " << g.subsample << "\nseed = " << g.seed << "\n";
  };
  out << "[synth]\nn_personas = " << s.n_personas << "\ndevices_min = " << s.devices_min
      << "\ndevices_max = " << s.devices_max << "\nevents_min = " << s.events_min
      << "\nevents_max = " << s.events_max << "\nn_domains = " << s.n_domains
      << "\npaths_per_domain = " << s.paths_per_domain
      << "\npages_per_path = " << s.pages_per_path << "\ntitle_vocab = " << s.title_vocab
      << "\ntitle_fraction = " << s.title_fraction
      << "\ntopic_concentration = " << s.topic_concentration
      << "\nn_communities = " << s.n_communities
      << "\ncommunity_weight = " << s.community_weight
      << "\ndevice_drift = " << s.device_drift
      << "\ncross_device_noise = " << s.cross_device_noise
      << "\ntime_habit_strength = " << s.time_habit_strength
      << "\ndevice_habit_drift = " << s.device_habit_drift
      << "\nsplit_train1 = " << s.split_train1 << "\nsplit_train2 = " << s.split_train2
      << "\nstart_time = " << s.start_time << "\ndays = " << s.days
      << "\nseed = " << s.seed << "\n\n";
  out << "[tfidf]\nmin_count = " << p.tfidf_min_count << "\n\n";
  out << "[embed]\ndim = " << e.dim << "\nwindow = " << e.window
      << "\nepochs = " << e.epochs << "\nnegative_samples = " << e.negative_samples
      << "\ninitial_lr = " << e.initial_lr << "\nfinal_lr = " << e.final_lr
      << "\nmin_count = " << e.min_count << "\nseed = " << e.seed
      << "\nworkers = " << e.workers
      << "\ntrain_words = " << (e.train_words ? "true" : "false") << "\n\n";
  out << "[knn]\nk = " << p.k << "\nrecall_ks = ";
  for (size_t i = 0; i < p.recall_ks.size(); ++i) {
    out << (i ? "," : "") << p.recall_ks[i];
  }
  if (!p.knn_sources.empty()) {
    out << "\nsources = ";
    for (size_t i = 0; i < p.knn_sources.size(); ++i) {
      out << (i ? "," : "") << p.knn_sources[i];
    }
  }
  out << "\n\n[sample]\nneg_ratio = " << p.neg_ratio << "\nseed = " << p.sample_seed
      << "\n\n";
  gbdt("scorer", p.scorer);
  out << "\n";
  gbdt("voter", p.voter);
  out << "input_ratio = " << p.voter_input_ratio << "\n\n";
  out << "[select]\nsup_ratio = " << p.sup_ratio << "\nunsup_ratio = " << p.unsup_ratio
      << "\nn_final = " << p.n_final << "\nalpha = " << p.alpha
      << "\nbeta = " << p.beta << "\n\n";
  out << "[pipeline]\nworkers = " << p.workers
      << "\ndeterministic = " << (p.deterministic ? "true" : "false") << "\n";
}

void apply_seed(AppConfig& cfg, uint64_t seed) {
  cfg.synth.seed = seed;
  cfg.pipeline.embed.seed = seed;
  cfg.pipeline.sample_seed = seed;
  cfg.pipeline.scorer.seed = seed;
  cfg.pipeline.voter.seed = seed + 1;
}

}  // namespace xdm

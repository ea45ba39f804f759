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

#include "xdevmatch/synth.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>

#include "json.hpp"

namespace xdm {
namespace {

using Rng = std::mt19937_64;

Rng stream_rng(uint64_t seed, uint64_t stream, uint64_t index = 0) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream), static_cast<uint32_t>(index),
                    static_cast<uint32_t>(index >> 32)};
  return Rng(seq);
}

class Categorical {
 public:
  Categorical() = default;
  explicit Categorical(const std::vector<double>& weights) : cdf_(weights.size()) {
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      cdf_[i] = acc;
    }
  }

  size_t draw(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, cdf_.back());
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u(rng));
    return std::min<size_t>(it - cdf_.begin(), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::vector<double> dirichlet(size_t n, double alpha, Rng& rng) {
  std::gamma_distribution<double> g(alpha, 1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) {
    x = g(rng);
    sum += x;
  }
  if (sum <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
    return w;
  }
  for (auto& x : w) x /= sum;
  return w;
}

std::vector<double> habit(size_t bins, double strength, Rng& rng) {
  auto w = dirichlet(bins, 0.3, rng);
  for (auto& x : w) x = strength * x + (1.0 - strength) / static_cast<double>(bins);
  return w;
}

struct Universe {
  int sections;
  int pages;
  std::vector<std::optional<std::vector<std::string>>> titles;
  Categorical background_domains;

  size_t url_index(int d, int s, int p) const {
    return (static_cast<size_t>(d) * sections + s) * pages + p;
  }
};

Universe build_universe(const SynthConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 0);
  Universe u{cfg.paths_per_domain, cfg.pages_per_path, {}, {}};
  std::uniform_int_distribution<int> word(0, cfg.title_vocab - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> title_len(3, 6);
  constexpr int kPoolSize = 20;
  u.titles.resize(u.url_index(cfg.n_domains, 0, 0));
  for (int d = 0; d < cfg.n_domains; ++d) {
    std::vector<int> pool(kPoolSize);
    for (auto& w : pool) w = word(rng);
    std::uniform_int_distribution<int> pick(0, kPoolSize - 1);
    for (int s = 0; s < u.sections; ++s) {
      for (int p = 0; p < u.pages; ++p) {
        if (coin(rng) >= cfg.title_fraction) continue;
        std::vector<std::string> title(title_len(rng));
        for (auto& t : title) t = "w" + std::to_string(pool[pick(rng)]);
        u.titles[u.url_index(d, s, p)] = std::move(title);
      }
    }
  }
  // Zipf popularity for the background traffic.
  std::vector<double> zipf(cfg.n_domains);
  for (int d = 0; d < cfg.n_domains; ++d) zipf[d] = 1.0 / (d + 1.0);
  u.background_domains = Categorical(zipf);
  return u;
}

std::vector<UserId> make_user_ids(size_t n, uint64_t seed) {
  Rng rng = stream_rng(seed, 1);
  std::set<UserId> seen;
  std::vector<UserId> ids;
  ids.reserve(n);
  static constexpr char kHex[] = "0123456789abcdef";
  while (ids.size() < n) {
    uint64_t x = rng();
    std::string id(12, '0');
    for (auto& c : id) {
      c = kHex[x & 0xf];
      x >>= 4;
    }
    if (seen.insert(id).second) ids.push_back(std::move(id));
  }
  return ids;
}

struct Topic {
  Categorical domains;
  std::vector<Categorical> sections;  // per domain
  std::vector<Categorical> pages;     // per (domain, section)
};

Topic make_topic(const SynthConfig& cfg, Rng& rng) {
  const double alpha = 1.0 / cfg.topic_concentration;
  Topic t;
  t.domains = Categorical(dirichlet(cfg.n_domains, alpha, rng));
  t.sections.reserve(cfg.n_domains);
  t.pages.reserve(static_cast<size_t>(cfg.n_domains) * cfg.paths_per_domain);
  for (int d = 0; d < cfg.n_domains; ++d) {
    t.sections.emplace_back(dirichlet(cfg.paths_per_domain, alpha, rng));
    for (int s = 0; s < cfg.paths_per_domain; ++s) {
      t.pages.emplace_back(dirichlet(cfg.pages_per_path, alpha, rng));
    }
  }
  return t;
}

struct Url {
  int domain, section, page;
};

Url draw_url(const SynthConfig& cfg, const Topic& t, Rng& rng) {
  Url u{};
  u.domain = static_cast<int>(t.domains.draw(rng));
  u.section = static_cast<int>(t.sections[u.domain].draw(rng));
  u.page = static_cast<int>(
      t.pages[static_cast<size_t>(u.domain) * cfg.paths_per_domain + u.section].draw(rng));
  return u;
}

struct Habit {
  std::vector<double> hourly;
  std::vector<double> weekly;
};

Habit make_habit(const SynthConfig& cfg, Rng& rng) {
  return {habit(24, cfg.time_habit_strength, rng), habit(7, cfg.time_habit_strength, rng)};
}

std::vector<double> blend(const std::vector<double>& a, const std::vector<double>& b,
                          double w) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return out;
}

struct DeviceSource {
  const Topic* community;
  const Topic* persona;
  const Topic* device;
  Categorical hourly;
  Categorical weekly;
};

UserLog device_log(const SynthConfig& cfg, const Universe& u, const DeviceSource& src,
                   const UserId& user, int n_events, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any_section(0, cfg.paths_per_domain - 1);
  std::uniform_int_distribution<int> any_page(0, cfg.pages_per_path - 1);
  std::uniform_int_distribution<int> week(0, cfg.days / 7 - 1);
  std::uniform_int_distribution<int64_t> second(0, 3599);
  std::uniform_int_distribution<int64_t> gap(5, 120);
  std::geometric_distribution<int> extra(1.0 / 6.0);
  const int64_t start_weekday = (cfg.start_time / 86400 + 3) % 7;

  UserLog log{user, {}};
  log.events.reserve(n_events);
  int remaining = n_events;
  while (remaining > 0) {
    const int len = std::min(remaining, 1 + extra(rng));
    remaining -= len;
    const auto weekday = static_cast<int64_t>(src.weekly.draw(rng));
    const int64_t day = week(rng) * 7 + (weekday - start_weekday + 7) % 7;
    int64_t t = cfg.start_time + day * 86400 +
                static_cast<int64_t>(src.hourly.draw(rng)) * 3600 + second(rng);
    for (int i = 0; i < len; ++i) {
      Url url{};
      const double r = coin(rng);
      if (r < cfg.cross_device_noise) {
        url = {static_cast<int>(u.background_domains.draw(rng)), any_section(rng),
               any_page(rng)};
      } else {
        // Split the remaining mass between device, community and persona.
        const double x = (r - cfg.cross_device_noise) / (1.0 - cfg.cross_device_noise);
        if (x < cfg.device_drift) {
          url = draw_url(cfg, *src.device, rng);
        } else if (x < cfg.device_drift + (1.0 - cfg.device_drift) * cfg.community_weight) {
          url = draw_url(cfg, *src.community, rng);
        } else {
          url = draw_url(cfg, *src.persona, rng);
        }
      }
      Event e;
      e.user_id = user;
      e.timestamp = t;
      e.domain = "site" + std::to_string(url.domain) + ".com";
      e.path_segments = {"s" + std::to_string(url.section), "p" + std::to_string(url.page)};
      e.title_tokens = u.titles[u.url_index(url.domain, url.section, url.page)];
      log.events.push_back(std::move(e));
      t += gap(rng);
    }
  }
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  return log;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_personas < 1) throw Error("synth: n_personas must be >= 1");
  if (devices_min < 1 || devices_max > 5 || devices_min > devices_max) {
    throw Error("synth: devices range must lie within [1, 5]");
  }
  if (events_min < 1 || events_min > events_max) {
    throw Error("synth: events range must be non-empty and >= 1");
  }
  if (n_domains < 1 || paths_per_domain < 1 || pages_per_path < 1 ||
      title_vocab < 1) {
    throw Error("synth: universe counts must be >= 1");
  }
  if (!(topic_concentration > 0)) throw Error("synth: topic_concentration must be > 0");
  if (n_communities < 1) throw Error("synth: n_communities must be >= 1");
  for (const double x : {cross_device_noise, time_habit_strength, title_fraction,
                         community_weight, device_drift, device_habit_drift}) {
    if (!(x >= 0 && x <= 1)) throw Error("synth: rates must lie in [0, 1]");
  }
  if (days < 7) throw Error("synth: days must be >= 7");
  if (start_time < 0) throw Error("synth: start_time must be >= 0");
}

SynthDataset generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  const Universe universe = build_universe(cfg);

  Rng layout = stream_rng(cfg.seed, 2);
  std::uniform_int_distribution<int> devices(cfg.devices_min, cfg.devices_max);
  std::vector<int> device_count(cfg.n_personas);
  size_t n_users = 0;
  for (auto& c : device_count) {
    c = devices(layout);
    n_users += c;
  }
  const auto ids = make_user_ids(n_users, cfg.seed);

  std::vector<Topic> communities;
  std::vector<int> community_of(cfg.n_personas);
  {
    Rng rng = stream_rng(cfg.seed, 4);
    for (int c = 0; c < cfg.n_communities; ++c) communities.push_back(make_topic(cfg, rng));
    std::uniform_int_distribution<int> pick(0, cfg.n_communities - 1);
    for (auto& c : community_of) c = pick(rng);
  }

  SynthDataset data;
  std::vector<UserId> paired_users;
  size_t next_id = 0;
  for (int pi = 0; pi < cfg.n_personas; ++pi) {
    Rng rng = stream_rng(cfg.seed, 3, static_cast<uint64_t>(pi));
    const Topic persona = make_topic(cfg, rng);
    const Habit persona_habit = make_habit(cfg, rng);
    std::uniform_int_distribution<int> events(cfg.events_min, cfg.events_max);
    std::vector<UserId> own;
    for (int dv = 0; dv < device_count[pi]; ++dv) {
      const UserId& user = ids[next_id++];
      own.push_back(user);
      data.persona_of[user] = pi;
      const Topic device = make_topic(cfg, rng);
      const Habit device_habit = make_habit(cfg, rng);
      const DeviceSource src{
          &communities[community_of[pi]], &persona, &device,
          Categorical(blend(persona_habit.hourly, device_habit.hourly,
                            cfg.device_habit_drift)),
          Categorical(blend(persona_habit.weekly, device_habit.weekly,
                            cfg.device_habit_drift))};
      data.logs.push_back(device_log(cfg, universe, src, user, events(rng), rng));
    }
    for (size_t i = 0; i < own.size(); ++i) {
      for (size_t j = i + 1; j < own.size(); ++j) data.truth.emplace_back(own[i], own[j]);
    }
    if (own.size() > 1) paired_users.insert(paired_users.end(), own.begin(), own.end());
  }

  for (const auto& log : data.logs) data.splits[log.user_id] = Partition::kHeldout;
  if (!paired_users.empty()) {
    const auto split =
        split_users(paired_users, cfg.split_train1, cfg.split_train2, cfg.seed);
    for (const auto& u : split.train1) data.splits[u] = Partition::kTrain1;
    for (const auto& u : split.train2) data.splits[u] = Partition::kTrain2;
  }
  return data;
}

void write_dataset(const std::string& dir, const SynthDataset& data,
                   const SynthConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  {
    std::ofstream out(root / "events.tsv");
    write_events(out, data.logs);
    if (!out) throw Error("cannot write events.tsv in " + dir);
  }
  write_pairs_file((root / "truth.csv").string(), data.truth);
  {
    std::ofstream out(root / "splits.tsv");
    write_splits(out, data.splits);
    if (!out) throw Error("cannot write splits.tsv in " + dir);
  }
  nlohmann::ordered_json manifest;
  manifest["generator"] = "xdevmatch-synth";
  manifest["seed"] = cfg.seed;
  manifest["config"] = {
      {"n_personas", cfg.n_personas},
      {"devices_min", cfg.devices_min},
      {"devices_max", cfg.devices_max},
      {"events_min", cfg.events_min},
      {"events_max", cfg.events_max},
      {"n_domains", cfg.n_domains},
      {"paths_per_domain", cfg.paths_per_domain},
      {"pages_per_path", cfg.pages_per_path},
      {"title_vocab", cfg.title_vocab},
      {"title_fraction", cfg.title_fraction},
      {"topic_concentration", cfg.topic_concentration},
      {"n_communities", cfg.n_communities},
      {"community_weight", cfg.community_weight},
      {"device_drift", cfg.device_drift},
      {"cross_device_noise", cfg.cross_device_noise},
      {"time_habit_strength", cfg.time_habit_strength},
      {"device_habit_drift", cfg.device_habit_drift},
      {"split_train1", cfg.split_train1},
      {"split_train2", cfg.split_train2},
      {"start_time", cfg.start_time},
      {"days", cfg.days},
  };
  manifest["users"] = data.logs.size();
  manifest["truth_pairs"] = data.truth.size();
  std::ofstream out(root / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("cannot write manifest.json in " + dir);
}

}  // namespace xdm

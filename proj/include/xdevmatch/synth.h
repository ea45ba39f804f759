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

// Synthetic clickstreams with planted multi-device personas.
//
// The URL universe is `site<d>.com/s<j>/p<l>`. A topic is a Dirichlet
// preference over domains, sections and pages (alpha = 1 / concentration).
// Personas belong to one of n_communities shared topics and own a private
// topic plus hour-of-day and day-of-week habits. Each device additionally
// owns a private topic and habit. An event URL comes from the Zipf background
// with probability cross_device_noise, otherwise from the device topic
// (device_drift), the community topic (community_weight) or the persona
// topic. A title_fraction share of URLs carries title words drawn from a
// per-domain word pool.

#ifndef XDEVMATCH_SYNTH_H_
#define XDEVMATCH_SYNTH_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xdevmatch/common.h"
#include "xdevmatch/ingest.h"

namespace xdm {

struct SynthConfig {
  int n_personas = 500;
  int devices_min = 2;
  int devices_max = 5;
  int events_min = 300;
  int events_max = 300;
  int n_domains = 300;
  int paths_per_domain = 12;  // first-level sections per domain
  int pages_per_path = 6;     // second-level pages per section
  int title_vocab = 3000;
  double title_fraction = 0.3;
  double topic_concentration = 2.0;  // Dirichlet alpha = 1 / concentration
  int n_communities = 20;
  double community_weight = 0.5;
  double device_drift = 0.35;
  double cross_device_noise = 0.15;
  double time_habit_strength = 0.7;
  double device_habit_drift = 0.3;  // device share of its own time habit
  double split_train1 = 0.35;
  double split_train2 = 0.30;
  int64_t start_time = 1464739200;  // 2016-06-01 00:00 UTC
  // Session starts fall in whole weeks of this window; a session begun late
  // on the last day may run a few minutes past it.
  int days = 28;
  uint64_t seed = 7;

  void validate() const;
};

struct SynthDataset {
  std::vector<UserLog> logs;  // persona, then device order; events by time
  std::vector<CandidatePair> truth;  // within-persona device pairs
  SplitMap splits;  // truth users split; users without a pair are held out
  std::map<UserId, int> persona_of;
};

SynthDataset generate_dataset(const SynthConfig& cfg);

// Writes events.tsv, truth.csv, splits.tsv and manifest.json into `dir`
// (created if missing). Output is byte-identical for identical configs.
void write_dataset(const std::string& dir, const SynthDataset& data,
                   const SynthConfig& cfg);

}  // namespace xdm

#endif  // XDEVMATCH_SYNTH_H_

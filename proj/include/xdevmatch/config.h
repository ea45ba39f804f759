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

// Flat `key = value` configuration with one [section] per module:
// synth, tfidf, embed, knn, sample, scorer, voter, select, pipeline.
// Unknown sections or keys are errors.

#ifndef XDEVMATCH_CONFIG_H_
#define XDEVMATCH_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "xdevmatch/pipeline.h"
#include "xdevmatch/synth.h"

namespace xdm {

struct AppConfig {
  SynthConfig synth;
  PipelineConfig pipeline;
};

AppConfig parse_config(std::istream& in, const std::string& source = "<config>");
AppConfig load_config(const std::string& path);
void write_config(std::ostream& out, const AppConfig& cfg);

// Reseeds every stochastic stage from one master seed.
void apply_seed(AppConfig& cfg, uint64_t seed);

}  // namespace xdm

#endif  // XDEVMATCH_CONFIG_H_

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

// Event log parsing and per-user token documents.
//
// Events file: UTF-8, one event per line,
//   user_id TAB epoch_seconds TAB url [TAB space_separated_title_tokens]
// A URL is `[scheme://]domain[/seg]*[?query][#fragment]`; query and fragment
// are dropped and empty segments are skipped.

#ifndef XDEVMATCH_INGEST_H_
#define XDEVMATCH_INGEST_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xdevmatch/common.h"

namespace xdm {

struct Event {
  UserId user_id;
  int64_t timestamp = 0;  // epoch seconds, UTC
  std::string domain;
  std::vector<std::string> path_segments;
  std::optional<std::vector<std::string>> title_tokens;

  friend bool operator==(const Event&, const Event&) = default;
};

struct UserLog {
  UserId user_id;
  std::vector<Event> events;  // ascending timestamp, stable on ties
};

// URL prefix depth. 0 is the bare domain.
class HierLevel {
 public:
  static constexpr int kCount = 4;

  constexpr explicit HierLevel(int h) : h_(h) {
    if (h < 0 || h >= kCount) throw Error("hierarchy level out of range");
  }
  constexpr int value() const { return h_; }

 private:
  int h_;
};

// Ordered user -> token list. Ordered so every traversal is deterministic.
using Corpus = std::map<UserId, std::vector<std::string>>;

struct ParsedUrl {
  std::string domain;
  std::vector<std::string> path_segments;
};

ParsedUrl parse_url(std::string_view url);

// One UserLog per distinct user, ordered by user_id.
std::vector<UserLog> parse_events(std::istream& in);
std::vector<UserLog> parse_events_file(const std::string& path);

// Serializes logs back to the events format (URL without query/fragment).
void write_events(std::ostream& out, const std::vector<UserLog>& logs);

std::string token_at_level(const Event& e, HierLevel h);

std::vector<std::string> dedup_consecutive(std::vector<std::string> tokens);

Corpus build_user_documents(const std::vector<UserLog>& logs, HierLevel h);

// Title tokens of every titled event, concatenated in event order. Users
// without titled events map to an empty document.
Corpus build_title_documents(const std::vector<UserLog>& logs);

enum class Partition { kTrain1, kTrain2, kHeldout };

std::string_view partition_name(Partition p);
Partition parse_partition(std::string_view name);

struct UserSplit {
  std::vector<UserId> train1;
  std::vector<UserId> train2;
  std::vector<UserId> heldout;
};

// Seeded shuffle, then the first floor(f1*n) users go to train1, the next
// floor(f2*n) to train2 and the rest are held out. Each partition is
// returned sorted.
UserSplit split_users(std::vector<UserId> users, double f1, double f2,
                      uint64_t seed);

// Splits file: `user_id TAB partition` lines.
using SplitMap = std::map<UserId, Partition>;
SplitMap read_splits_file(const std::string& path);
void write_splits(std::ostream& out, const SplitMap& splits);

}  // namespace xdm

#endif  // XDEVMATCH_INGEST_H_

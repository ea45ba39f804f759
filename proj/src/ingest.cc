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

#include "xdevmatch/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_map>

namespace xdm {
namespace {

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void line_error(size_t line_no, const std::string& what) {
  throw Error("events line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

ParsedUrl parse_url(std::string_view url) {
  if (const auto scheme = url.find("://"); scheme != std::string_view::npos) {
    url.remove_prefix(scheme + 3);
  }
  url = url.substr(0, url.find_first_of("?#"));
  ParsedUrl out;
  bool first = true;
  for (auto part : split_on(url, '/')) {
    if (first) {
      out.domain = std::string(part);
      first = false;
    } else if (!part.empty()) {
      out.path_segments.emplace_back(part);
    }
  }
  if (out.domain.empty()) throw Error("url has empty domain");
  return out;
}

std::vector<UserLog> parse_events(std::istream& in) {
  std::unordered_map<UserId, size_t> index;
  std::vector<UserLog> logs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_on(line, '\t');
    if (fields.size() != 3 && fields.size() != 4) {
      line_error(line_no, "expected 3 or 4 tab-separated fields, got " +
                              std::to_string(fields.size()));
    }
    Event e;
    e.user_id = std::string(fields[0]);
    if (e.user_id.empty()) line_error(line_no, "empty user id");
    const auto ts = fields[1];
    const auto [ptr, ec] =
        std::from_chars(ts.data(), ts.data() + ts.size(), e.timestamp);
    if (ec != std::errc() || ptr != ts.data() + ts.size() || ts.empty()) {
      line_error(line_no, "timestamp is not an integer");
    }
    if (e.timestamp < 0) line_error(line_no, "negative timestamp");
    try {
      auto url = parse_url(fields[2]);
      e.domain = std::move(url.domain);
      e.path_segments = std::move(url.path_segments);
    } catch (const Error& err) {
      line_error(line_no, err.what());
    }
    if (fields.size() == 4 && !fields[3].empty()) {
      std::vector<std::string> title;
      for (auto tok : split_on(fields[3], ' ')) {
        if (!tok.empty()) title.emplace_back(tok);
      }
      if (!title.empty()) e.title_tokens = std::move(title);
    }
    auto [it, inserted] = index.try_emplace(e.user_id, logs.size());
    if (inserted) logs.push_back(UserLog{e.user_id, {}});
    logs[it->second].events.push_back(std::move(e));
  }
  for (auto& log : logs) {
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const Event& x, const Event& y) {
                       return x.timestamp < y.timestamp;
                     });
  }
  std::sort(logs.begin(), logs.end(), [](const UserLog& x, const UserLog& y) {
    return x.user_id < y.user_id;
  });
  return logs;
}

std::vector<UserLog> parse_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open events file " + path);
  return parse_events(in);
}

void write_events(std::ostream& out, const std::vector<UserLog>& logs) {
  for (const auto& log : logs) {
    for (const auto& e : log.events) {
      out << e.user_id << '\t' << e.timestamp << '\t' << e.domain;
      for (const auto& seg : e.path_segments) out << '/' << seg;
      out << '\t';
      if (e.title_tokens) {
        for (size_t i = 0; i < e.title_tokens->size(); ++i) {
          if (i) out << ' ';
          out << (*e.title_tokens)[i];
        }
      }
      out << '\n';
    }
  }
}

std::string token_at_level(const Event& e, HierLevel h) {
  std::string token = e.domain;
  const size_t depth =
      std::min(static_cast<size_t>(h.value()), e.path_segments.size());
  for (size_t i = 0; i < depth; ++i) {
    token += '/';
    token += e.path_segments[i];
  }
  return token;
}

std::vector<std::string> dedup_consecutive(std::vector<std::string> tokens) {
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

Corpus build_user_documents(const std::vector<UserLog>& logs, HierLevel h) {
  Corpus docs;
  for (const auto& log : logs) {
    std::vector<std::string> tokens;
    tokens.reserve(log.events.size());
    for (const auto& e : log.events) tokens.push_back(token_at_level(e, h));
    docs[log.user_id] = dedup_consecutive(std::move(tokens));
  }
  return docs;
}

Corpus build_title_documents(const std::vector<UserLog>& logs) {
  Corpus docs;
  for (const auto& log : logs) {
    auto& doc = docs[log.user_id];
    for (const auto& e : log.events) {
      if (e.title_tokens) {
        doc.insert(doc.end(), e.title_tokens->begin(), e.title_tokens->end());
      }
    }
  }
  return docs;
}

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::kTrain1:
      return "train1";
    case Partition::kTrain2:
      return "train2";
    case Partition::kHeldout:
      return "heldout";
  }
  return "heldout";
}

Partition parse_partition(std::string_view name) {
  if (name == "train1") return Partition::kTrain1;
  if (name == "train2") return Partition::kTrain2;
  if (name == "heldout") return Partition::kHeldout;
  throw Error("unknown partition: " + std::string(name));
}

UserSplit split_users(std::vector<UserId> users, double f1, double f2,
                      uint64_t seed) {
  if (users.empty()) throw Error("split_users: empty user list");
  if (f1 < 0 || f2 < 0 || f1 + f2 > 1.0 + 1e-12) {
    throw Error("split_users: fractions must be non-negative and sum to <= 1");
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  std::mt19937_64 rng(seed);
  std::shuffle(users.begin(), users.end(), rng);

  const size_t n = users.size();
  // The epsilon keeps 0.4 * 10 from landing on 3.999...
  const auto n1 = static_cast<size_t>(std::floor(f1 * n + 1e-9));
  const auto n2 = std::min(n - n1, static_cast<size_t>(std::floor(f2 * n + 1e-9)));

  UserSplit split;
  split.train1.assign(users.begin(), users.begin() + n1);
  split.train2.assign(users.begin() + n1, users.begin() + n1 + n2);
  split.heldout.assign(users.begin() + n1 + n2, users.end());
  for (auto* part : {&split.train1, &split.train2, &split.heldout}) {
    std::sort(part->begin(), part->end());
  }
  return split;
}

SplitMap read_splits_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open splits file " + path);
  SplitMap splits;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("splits line " + std::to_string(line_no) +
                  ": expected `user TAB partition`");
    }
    splits[line.substr(0, tab)] = parse_partition(line.substr(tab + 1));
  }
  return splits;
}

void write_splits(std::ostream& out, const SplitMap& splits) {
  for (const auto& [user, part] : splits) {
    out << user << '\t' << partition_name(part) << '\n';
  }
}

}  // namespace xdm

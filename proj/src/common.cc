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

#include "xdevmatch/common.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

namespace xdm {

CandidatePair::CandidatePair(UserId x, UserId y) {
  if (x == y) throw Error("pair endpoints must differ: " + x);
  if (y < x) std::swap(x, y);
  a_ = std::move(x);
  b_ = std::move(y);
}

std::vector<CandidatePair> read_pairs(std::istream& in) {
  std::vector<CandidatePair> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == line.size() ||
        line.find(',', comma + 1) != std::string::npos) {
      throw Error("pairs line " + std::to_string(line_no) +
                  ": expected `a,b`");
    }
    try {
      pairs.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    } catch (const Error& e) {
      throw Error("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

std::vector<CandidatePair> read_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pairs file " + path);
  return read_pairs(in);
}

void write_pairs(std::ostream& out, const std::vector<CandidatePair>& pairs) {
  for (const auto& p : pairs) out << p.a() << ',' << p.b() << '\n';
}

void write_pairs_file(const std::string& path,
                      const std::vector<CandidatePair>& pairs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write pairs file " + path);
  write_pairs(out, pairs);
}

void parallel_for(size_t n, int workers,
                  const std::function<void(size_t)>& fn) {
  const size_t threads =
      std::min<size_t>(n, static_cast<size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace xdm

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

#ifndef XDEVMATCH_COMMON_H_
#define XDEVMATCH_COMMON_H_

#include <compare>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace xdm {

using UserId = std::string;

// All library failures surface as this exception type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unordered user pair stored in canonical order (a < b).
class CandidatePair {
 public:
  CandidatePair(UserId x, UserId y);

  const UserId& a() const { return a_; }
  const UserId& b() const { return b_; }

  friend auto operator<=>(const CandidatePair&, const CandidatePair&) = default;
  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;

 private:
  UserId a_;
  UserId b_;
};

struct PairHash {
  size_t operator()(const CandidatePair& p) const noexcept {
    size_t h = std::hash<std::string>{}(p.a());
    return h ^ (std::hash<std::string>{}(p.b()) + 0x9e3779b97f4a7c15ULL +
                (h << 6) + (h >> 2));
  }
};

using PairSet = std::unordered_set<CandidatePair, PairHash>;

// Pairs file: one `a,b` per line. Reading canonicalizes each pair; a
// malformed line raises Error naming the line number.
std::vector<CandidatePair> read_pairs(std::istream& in);
std::vector<CandidatePair> read_pairs_file(const std::string& path);
void write_pairs(std::ostream& out, const std::vector<CandidatePair>& pairs);
void write_pairs_file(const std::string& path,
                      const std::vector<CandidatePair>& pairs);

// Keeps pairs whose endpoints both satisfy `member`.
template <typename Pred>
PairSet restrict_pairs(const std::vector<CandidatePair>& pairs, Pred member) {
  PairSet out;
  for (const auto& p : pairs) {
    if (member(p.a()) && member(p.b())) out.insert(p);
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
// visited exactly once; callers write results to per-index slots so the
// outcome does not depend on the worker count.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn);

}  // namespace xdm

#endif  // XDEVMATCH_COMMON_H_

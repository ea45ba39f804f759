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

// Little-endian binary framing shared by all artifact files. Every artifact
// starts with a four-byte magic and a u32 version.

#ifndef XDEVMATCH_BINIO_H_
#define XDEVMATCH_BINIO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "xdevmatch/common.h"

namespace xdm::binio {

static_assert(std::endian::native == std::endian::little,
              "artifact files assume a little-endian host");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void header(std::string_view magic, uint32_t version) {
    out_.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    put(version);
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void put(const std::string& s) {
    put<uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put_span(std::span<const T> v) {
    put<uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size_bytes()));
  }

  void put_strings(const std::vector<std::string>& v) {
    put<uint64_t>(v.size());
    for (const auto& s : v) put(s);
  }

  void check() const {
    if (!out_) throw Error("artifact write failed");
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void expect_header(std::string_view magic, uint32_t version) {
    std::string got(magic.size(), '\0');
    raw(got.data(), got.size());
    if (got != magic) {
      throw Error("artifact magic mismatch: expected " + std::string(magic));
    }
    const auto v = get<uint32_t>();
    if (v != version) {
      throw Error("unsupported artifact version " + std::to_string(v) +
                  " for " + std::string(magic));
    }
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }

  std::string get_string() {
    const auto n = get<uint64_t>();
    bound(n);
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  std::vector<T> get_vector() {
    const auto n = get<uint64_t>();
    bound(n * sizeof(T));
    std::vector<T> v(n);
    raw(v.data(), n * sizeof(T));
    return v;
  }

  std::vector<std::string> get_strings() {
    const auto n = get<uint64_t>();
    bound(n);
    std::vector<std::string> v;
    v.reserve(n);
    for (uint64_t i = 0; i < n; ++i) v.push_back(get_string());
    return v;
  }

 private:
  void raw(void* dst, size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
      throw Error("artifact truncated");
    }
  }

  // Rejects absurd lengths from corrupt files before allocating.
  static void bound(uint64_t n) {
    if (n > (uint64_t{1} << 40)) throw Error("artifact length field corrupt");
  }

  std::istream& in_;
};

}  // namespace xdm::binio

#endif  // XDEVMATCH_BINIO_H_

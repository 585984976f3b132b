// Copyright 2026 The dpfr authors
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
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace dpfr {

using UserId = std::int32_t;
using ItemId = std::int32_t;

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  char sep = '\t') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) {
    return std::nullopt;
  }
  std::string buf(s);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) {
    return std::nullopt;
  }
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) {
    return std::nullopt;
  }
  std::string buf(s);
  char* end = nullptr;
  long long v = std::strtoll(buf.c_str(), &end, 10);
  if (end != buf.c_str() + buf.size()) {
    return std::nullopt;
  }
  return static_cast<std::int64_t>(v);
}

// Compact, locale-independent float formatting used in all text outputs.
inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::string(buf);
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open file for hashing: " + path);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

// Seeded RNG wrapper. All randomized code paths go through this so that a
// fixed seed yields identical output across runs and platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }

  double unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 gen_;
};

// Runs fn(begin, end) over fixed-size chunks of [0, n), optionally on worker
// threads. Chunk boundaries do not depend on the thread count, so reductions
// that combine per-chunk results in chunk order are deterministic.
template <typename Fn>
void for_chunks(std::size_t n, int threads, std::size_t chunk, Fn&& fn) {
  if (n == 0) {
    return;
  }
  std::size_t num_chunks = (n + chunk - 1) / chunk;
  if (threads <= 1 || num_chunks <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) {
      fn(c * chunk, std::min(n, (c + 1) * chunk));
    }
    return;
  }
  std::vector<std::thread> pool;
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads),
                                              num_chunks);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < num_chunks; c += workers) {
        fn(c * chunk, std::min(n, (c + 1) * chunk));
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
}

inline bool contains_sorted(const std::vector<ItemId>& sorted, ItemId x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

}  // namespace dpfr

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

#include <zlib.h>

#include <mutex>

#include "dpfr/dataset.hpp"

namespace dpfr {

struct RunEntry {
  ItemId item;
  double score;
};

// Ranked recommendation lists for the evaluated (test) users. Rank is derived
// from the score order with input order as the tie-break; each user's list
// excludes that user's train/val items and contains no duplicates.
struct RunTable {
  std::string tag;
  std::vector<UserId> users;                  // ascending dense ids
  std::vector<std::string> user_names;        // aligned external ids
  std::vector<std::vector<RunEntry>> lists;   // aligned, score-descending
  int num_items = 0;
  std::size_t dropped_users = 0;              // file users outside test split

  int num_users() const { return static_cast<int>(users.size()); }

  std::size_t min_list_len() const {
    std::size_t m = lists.empty() ? 0 : lists.front().size();
    for (const auto& l : lists) {
      m = std::min(m, l.size());
    }
    return m;
  }
};

// Per-item counts of appearances in the top-k across all evaluated users.
struct ExposureVector {
  std::vector<std::int64_t> counts;
  int k = 0;
  int m = 0;  // number of users counted

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto c : counts) {
      s += c;
    }
    return s;
  }
};

namespace detail {

inline std::vector<std::string> read_text_lines_maybe_gz(const std::string& path) {
  // gzread is transparent for plain files, so one reader covers both.
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) {
    throw Error("cannot open run file: " + path);
  }
  std::vector<std::string> lines;
  std::string cur;
  char buf[1 << 15];
  int got;
  while ((got = gzread(f, buf, sizeof(buf))) > 0) {
    for (int i = 0; i < got; ++i) {
      if (buf[i] == '\n') {
        if (!cur.empty() && cur.back() == '\r') {
          cur.pop_back();
        }
        lines.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(buf[i]);
      }
    }
  }
  if (got < 0) {
    gzclose(f);
    throw Error("error while reading run file: " + path);
  }
  gzclose(f);
  if (!cur.empty()) {
    lines.push_back(cur);
  }
  return lines;
}

}  // namespace detail

// Validates raw per-user entries and freezes them into a RunTable: sorts by
// (score desc, input order), rejects duplicates and history violations, and
// drops users that are not in the test split (counted, not fatal).
inline RunTable make_run_table(
    const std::string& tag, const SplitDataset& split,
    const std::map<UserId, std::vector<RunEntry>>& per_user,
    std::size_t dropped = 0) {
  RunTable rt;
  rt.tag = tag;
  rt.num_items = split.num_items();
  rt.dropped_users = dropped;
  for (const auto& [u, entries] : per_user) {
    std::vector<RunEntry> list = entries;
    std::stable_sort(list.begin(), list.end(),
                     [](const RunEntry& a, const RunEntry& b) {
                       return a.score > b.score;
                     });
    std::unordered_set<ItemId> seen;
    for (const auto& e : list) {
      if (!seen.insert(e.item).second) {
        throw Error("run '" + tag + "': duplicate item '" +
                    split.items[e.item] + "' for user '" + split.users[u] +
                    "'");
      }
      if (contains_sorted(split.history[u], e.item)) {
        throw Error("run '" + tag + "': item '" + split.items[e.item] +
                    "' recommended to user '" + split.users[u] +
                    "' is in that user's train/val history");
      }
    }
    rt.users.push_back(u);
    rt.user_names.push_back(split.users[u]);
    rt.lists.push_back(std::move(list));
  }
  return rt;
}

// Run file format: user<TAB>item<TAB>score, scores descending per user.
// A gzip-compressed file is accepted transparently.
inline RunTable load_run(const std::string& path, const SplitDataset& split,
                         std::string tag = "") {
  if (tag.empty()) {
    tag = std::filesystem::path(path).stem().string();
  }
  std::map<UserId, std::vector<RunEntry>> per_user;
  std::unordered_set<std::string> dropped_names;
  for (const auto& line : detail::read_text_lines_maybe_gz(path)) {
    if (line.empty()) {
      continue;
    }
    auto f = split_fields(line);
    if (f.size() != 3) {
      throw Error("malformed run line in " + path + ": " + line);
    }
    auto uit = split.user_index.find(std::string(f[0]));
    if (uit == split.user_index.end() ||
        split.test[uit->second].empty()) {
      dropped_names.insert(std::string(f[0]));
      continue;
    }
    auto iit = split.item_index.find(std::string(f[1]));
    if (iit == split.item_index.end()) {
      throw Error("run file " + path + " references unknown item: " +
                  std::string(f[1]));
    }
    auto score = parse_double(f[2]);
    if (!score) {
      throw Error("bad score in run line: " + line);
    }
    per_user[uit->second].push_back({iit->second, *score});
  }
  return make_run_table(tag, split, per_user, dropped_names.size());
}

// External item names live in the split the table was built against.
inline void save_run(const RunTable& rt, const SplitDataset& split,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write run file: " + path);
  }
  for (std::size_t r = 0; r < rt.lists.size(); ++r) {
    for (const auto& e : rt.lists[r]) {
      out << rt.user_names[r] << '\t' << split.items[e.item] << '\t'
          << fmt_double(e.score) << '\n';
    }
  }
}

// Exact top-k appearance counts. Associative per-user counting; user chunks
// can run on worker threads and merge without affecting the result.
inline ExposureVector exposure(const RunTable& run, int k, int threads = 1) {
  ExposureVector ev;
  ev.k = k;
  ev.m = run.num_users();
  ev.counts.assign(run.num_items, 0);
  for (std::size_t r = 0; r < run.lists.size(); ++r) {
    if (run.lists[r].size() < static_cast<std::size_t>(k)) {
      throw Error("user '" + run.user_names[r] + "' has only " +
                  std::to_string(run.lists[r].size()) +
                  " recommendations, need k=" + std::to_string(k));
    }
  }
  std::vector<std::vector<std::int64_t>> partial;
  std::mutex mu;
  for_chunks(run.lists.size(), threads, 1024, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::int64_t> local(run.num_items, 0);
    for (std::size_t r = lo; r < hi; ++r) {
      for (int p = 0; p < k; ++p) {
        ++local[run.lists[r][p].item];
      }
    }
    std::lock_guard<std::mutex> g(mu);
    partial.push_back(std::move(local));
  });
  for (const auto& local : partial) {
    for (std::size_t i = 0; i < local.size(); ++i) {
      ev.counts[i] += local[i];
    }
  }
  return ev;
}

}  // namespace dpfr

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

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dpfr/common.hpp"

namespace dpfr {

struct Interaction {
  std::string user;
  std::string item;
  std::optional<double> rating;
  std::optional<std::int64_t> timestamp;
};

struct PreprocessConfig {
  std::optional<double> min_rating;          // drop rated interactions below
  std::optional<std::int64_t> max_user_interactions;  // drop heavy users
  int core = 5;                              // iterative k-core level
};

// Deduplicated, core-filtered interactions plus dense id tables. The dense
// ids are assigned in lexicographic order of the external ids so that loading
// the same data always yields the same indexing.
struct InteractionDataset {
  std::vector<Interaction> interactions;  // external ids
  std::vector<std::string> users;         // dense -> external
  std::vector<std::string> items;
  std::unordered_map<std::string, UserId> user_index;
  std::unordered_map<std::string, ItemId> item_index;

  int num_users() const { return static_cast<int>(users.size()); }
  int num_items() const { return static_cast<int>(items.size()); }

  double sparsity_pct() const {
    double cells = static_cast<double>(users.size()) * items.size();
    if (cells == 0) {
      return 0.0;
    }
    return (1.0 - static_cast<double>(interactions.size()) / cells) * 100.0;
  }
};

enum class SplitMode { Temporal, Random };

struct SplitRatio {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

// Train/val/test item sets per user, with the dense id tables carried over
// from the source dataset. history(u) = train ∪ val is never recommendable to
// u; relevant(u) = test items. Immutable once built.
struct SplitDataset {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::unordered_map<std::string, UserId> user_index;
  std::unordered_map<std::string, ItemId> item_index;

  std::vector<std::vector<ItemId>> train;    // sorted item ids per user
  std::vector<std::vector<ItemId>> val;
  std::vector<std::vector<ItemId>> test;
  std::vector<std::vector<ItemId>> history;  // train ∪ val, sorted
  std::vector<UserId> test_users;            // users with |test| >= 1, ascending

  int num_users() const { return static_cast<int>(users.size()); }
  int num_items() const { return static_cast<int>(items.size()); }
  int num_test_users() const { return static_cast<int>(test_users.size()); }

  const std::vector<ItemId>& relevant(UserId u) const { return test[u]; }
};

// ---------------------------------------------------------------------------
// Ingestion

// One interaction per line: user<TAB>item[<TAB>rating][<TAB>timestamp].
// An empty rating field means "absent". A header line is skipped when the
// third field is present and non-numeric.
inline std::vector<Interaction> read_interactions(std::istream& in) {
  std::vector<Interaction> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto f = split_fields(line);
    if (f.size() < 2) {
      throw Error("malformed interaction line: " + line);
    }
    if (first && f.size() >= 3 && !f[2].empty() && !parse_double(f[2])) {
      first = false;
      continue;  // header
    }
    first = false;
    Interaction it;
    it.user = std::string(f[0]);
    it.item = std::string(f[1]);
    if (it.user.empty() || it.item.empty()) {
      throw Error("empty user or item id in line: " + line);
    }
    if (f.size() >= 3 && !f[2].empty()) {
      auto r = parse_double(f[2]);
      if (!r) {
        throw Error("bad rating field in line: " + line);
      }
      it.rating = *r;
    }
    if (f.size() >= 4 && !f[3].empty()) {
      auto t = parse_int(f[3]);
      if (!t) {
        throw Error("bad timestamp field in line: " + line);
      }
      it.timestamp = *t;
    }
    out.push_back(std::move(it));
  }
  return out;
}

inline std::vector<Interaction> read_interactions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open interactions file: " + path);
  }
  return read_interactions(in);
}

// ---------------------------------------------------------------------------
// Preprocessing

// Dedup (user, item) keeping the most recent timestamp (last input line when
// timestamps tie or are absent), drop rated interactions below the threshold,
// drop users above the interaction cap, then peel users and items to an
// iterative k-core fixpoint.
inline InteractionDataset preprocess(const std::vector<Interaction>& raw,
                                     const PreprocessConfig& cfg = {}) {
  // Dedup: best = max (timestamp, input position).
  std::unordered_map<std::string, std::size_t> latest;
  latest.reserve(raw.size());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& it = raw[i];
    if (it.user.empty() || it.item.empty()) {
      throw Error("interaction with empty user or item id");
    }
    std::string key = it.user + '\t' + it.item;
    auto [pos, inserted] = latest.emplace(key, i);
    if (!inserted) {
      std::int64_t told = raw[pos->second].timestamp.value_or(INT64_MIN);
      std::int64_t tnew = it.timestamp.value_or(INT64_MIN);
      if (tnew >= told) {
        pos->second = i;
      }
    } else {
      order.push_back(i);
    }
  }
  std::vector<Interaction> kept;
  kept.reserve(order.size());
  for (std::size_t first_pos : order) {
    const auto& best = raw[latest[raw[first_pos].user + '\t' + raw[first_pos].item]];
    if (cfg.min_rating && best.rating && *best.rating < *cfg.min_rating) {
      continue;
    }
    kept.push_back(best);
  }

  // Per-user interaction cap, applied before coring.
  if (cfg.max_user_interactions) {
    std::unordered_map<std::string, std::int64_t> per_user;
    for (const auto& it : kept) {
      ++per_user[it.user];
    }
    std::vector<Interaction> capped;
    capped.reserve(kept.size());
    for (auto& it : kept) {
      if (per_user[it.user] <= *cfg.max_user_interactions) {
        capped.push_back(std::move(it));
      }
    }
    kept.swap(capped);
  }

  // Iterative k-core peeling until both user and item degrees >= core.
  if (cfg.core > 0) {
    bool changed = true;
    while (changed) {
      changed = false;
      std::unordered_map<std::string, int> udeg, ideg;
      for (const auto& it : kept) {
        ++udeg[it.user];
        ++ideg[it.item];
      }
      std::vector<Interaction> next;
      next.reserve(kept.size());
      for (auto& it : kept) {
        if (udeg[it.user] >= cfg.core && ideg[it.item] >= cfg.core) {
          next.push_back(std::move(it));
        } else {
          changed = true;
        }
      }
      kept.swap(next);
    }
  }

  if (kept.empty()) {
    throw Error("dataset degenerate: no interactions left after preprocessing");
  }

  InteractionDataset ds;
  ds.interactions = std::move(kept);
  {
    std::vector<std::string> us, is;
    std::unordered_set<std::string> useen, iseen;
    for (const auto& it : ds.interactions) {
      if (useen.insert(it.user).second) {
        us.push_back(it.user);
      }
      if (iseen.insert(it.item).second) {
        is.push_back(it.item);
      }
    }
    std::sort(us.begin(), us.end());
    std::sort(is.begin(), is.end());
    ds.users = std::move(us);
    ds.items = std::move(is);
    for (std::size_t i = 0; i < ds.users.size(); ++i) {
      ds.user_index[ds.users[i]] = static_cast<UserId>(i);
    }
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
      ds.item_index[ds.items[i]] = static_cast<ItemId>(i);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Splitting

inline SplitDataset split(const InteractionDataset& ds, SplitRatio ratio,
                          SplitMode mode, std::uint64_t seed) {
  if (std::abs(ratio.train + ratio.val + ratio.test - 1.0) > 1e-9) {
    throw Error("split ratios must sum to 1");
  }
  std::vector<std::size_t> idx(ds.interactions.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    idx[i] = i;
  }
  if (mode == SplitMode::Temporal) {
    for (const auto& it : ds.interactions) {
      if (!it.timestamp) {
        throw Error("temporal split requires timestamps on all interactions");
      }
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return *ds.interactions[a].timestamp < *ds.interactions[b].timestamp;
    });
  } else {
    Rng rng(seed);
    rng.shuffle(idx);
  }

  std::size_t n = idx.size();
  std::size_t n_train = static_cast<std::size_t>(ratio.train * n);
  std::size_t n_trval =
      static_cast<std::size_t>((ratio.train + ratio.val) * n);

  SplitDataset sd;
  sd.users = ds.users;
  sd.items = ds.items;
  sd.user_index = ds.user_index;
  sd.item_index = ds.item_index;
  int m = ds.num_users();
  sd.train.assign(m, {});
  sd.val.assign(m, {});
  sd.test.assign(m, {});
  sd.history.assign(m, {});

  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto& it = ds.interactions[idx[pos]];
    UserId u = ds.user_index.at(it.user);
    ItemId i = ds.item_index.at(it.item);
    if (pos < n_train) {
      sd.train[u].push_back(i);
    } else if (pos < n_trval) {
      sd.val[u].push_back(i);
    } else {
      sd.test[u].push_back(i);
    }
  }

  // Drop every split of users with fewer than 5 train interactions.
  for (UserId u = 0; u < m; ++u) {
    if (sd.train[u].size() < 5) {
      sd.train[u].clear();
      sd.val[u].clear();
      sd.test[u].clear();
    }
    std::sort(sd.train[u].begin(), sd.train[u].end());
    std::sort(sd.val[u].begin(), sd.val[u].end());
    std::sort(sd.test[u].begin(), sd.test[u].end());
    sd.history[u].resize(sd.train[u].size() + sd.val[u].size());
    std::merge(sd.train[u].begin(), sd.train[u].end(), sd.val[u].begin(),
               sd.val[u].end(), sd.history[u].begin());
    if (!sd.test[u].empty()) {
      sd.test_users.push_back(u);
    }
  }
  return sd;
}

// ---------------------------------------------------------------------------
// Split manifest I/O: one user<TAB>item file per split, plus the full id
// tables so the item universe survives a round trip.

inline void write_lines(const std::string& path,
                        const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write file: " + path);
  }
  for (const auto& l : lines) {
    out << l << '\n';
  }
}

inline void write_split(const SplitDataset& sd, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_lines(dir + "/users.tsv", sd.users);
  write_lines(dir + "/items.tsv", sd.items);
  const std::vector<std::vector<ItemId>>* parts[3] = {&sd.train, &sd.val,
                                                      &sd.test};
  const char* names[3] = {"train.tsv", "val.tsv", "test.tsv"};
  for (int p = 0; p < 3; ++p) {
    std::vector<std::string> lines;
    for (UserId u = 0; u < sd.num_users(); ++u) {
      for (ItemId i : (*parts[p])[u]) {
        lines.push_back(sd.users[u] + '\t' + sd.items[i]);
      }
    }
    write_lines(dir + '/' + names[p], lines);
  }
}

inline SplitDataset read_split(const std::string& dir) {
  auto read_all = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      throw Error("cannot open split file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      if (!line.empty()) {
        lines.push_back(line);
      }
    }
    return lines;
  };
  SplitDataset sd;
  sd.users = read_all(dir + "/users.tsv");
  sd.items = read_all(dir + "/items.tsv");
  for (std::size_t i = 0; i < sd.users.size(); ++i) {
    sd.user_index[sd.users[i]] = static_cast<UserId>(i);
  }
  for (std::size_t i = 0; i < sd.items.size(); ++i) {
    sd.item_index[sd.items[i]] = static_cast<ItemId>(i);
  }
  int m = sd.num_users();
  sd.train.assign(m, {});
  sd.val.assign(m, {});
  sd.test.assign(m, {});
  sd.history.assign(m, {});
  std::vector<std::vector<ItemId>>* parts[3] = {&sd.train, &sd.val, &sd.test};
  const char* names[3] = {"train.tsv", "val.tsv", "test.tsv"};
  for (int p = 0; p < 3; ++p) {
    for (const auto& line : read_all(dir + '/' + names[p])) {
      auto f = split_fields(line);
      if (f.size() != 2) {
        throw Error("malformed split line: " + line);
      }
      auto uit = sd.user_index.find(std::string(f[0]));
      auto iit = sd.item_index.find(std::string(f[1]));
      if (uit == sd.user_index.end() || iit == sd.item_index.end()) {
        throw Error("split references unknown id: " + line);
      }
      (*parts[p])[uit->second].push_back(iit->second);
    }
  }
  for (UserId u = 0; u < m; ++u) {
    std::sort(sd.train[u].begin(), sd.train[u].end());
    std::sort(sd.val[u].begin(), sd.val[u].end());
    std::sort(sd.test[u].begin(), sd.test[u].end());
    sd.history[u].resize(sd.train[u].size() + sd.val[u].size());
    std::merge(sd.train[u].begin(), sd.train[u].end(), sd.val[u].begin(),
               sd.val[u].end(), sd.history[u].begin());
    if (!sd.test[u].empty()) {
      sd.test_users.push_back(u);
    }
  }
  return sd;
}

// Dataset-level stats report: user/item/interaction counts and sparsity,
// per-split sizes, and the distribution of relevant items per test user.
inline std::string split_stats_report(const SplitDataset& sd) {
  std::ostringstream os;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  std::unordered_set<ItemId> it_train, it_val, it_test;
  int u_train = 0, u_val = 0, u_test = 0;
  for (UserId u = 0; u < sd.num_users(); ++u) {
    n_train += sd.train[u].size();
    n_val += sd.val[u].size();
    n_test += sd.test[u].size();
    if (!sd.train[u].empty()) {
      ++u_train;
    }
    if (!sd.val[u].empty()) {
      ++u_val;
    }
    if (!sd.test[u].empty()) {
      ++u_test;
    }
    it_train.insert(sd.train[u].begin(), sd.train[u].end());
    it_val.insert(sd.val[u].begin(), sd.val[u].end());
    it_test.insert(sd.test[u].begin(), sd.test[u].end());
  }
  std::size_t total = n_train + n_val + n_test;
  double cells = static_cast<double>(sd.num_users()) * sd.num_items();
  os << "users\t" << sd.num_users() << '\n';
  os << "items\t" << sd.num_items() << '\n';
  os << "interactions\t" << total << '\n';
  os << "sparsity_pct\t"
     << fmt_double(cells > 0 ? (1.0 - total / cells) * 100.0 : 0.0) << '\n';
  os << "train\t[" << u_train << ", " << it_train.size() << ", " << n_train
     << "]\n";
  os << "val\t[" << u_val << ", " << it_val.size() << ", " << n_val << "]\n";
  os << "test\t[" << u_test << ", " << it_test.size() << ", " << n_test
     << "]\n";

  std::vector<std::size_t> rel;
  for (UserId u : sd.test_users) {
    rel.push_back(sd.test[u].size());
  }
  if (!rel.empty()) {
    std::sort(rel.begin(), rel.end());
    double mean = 0;
    for (auto r : rel) {
      mean += static_cast<double>(r);
    }
    mean /= static_cast<double>(rel.size());
    std::size_t median = rel[rel.size() / 2];
    os << "relevant_per_user\tmean=" << fmt_double(mean) << " min=" << rel.front()
       << " median=" << median << " max=" << rel.back() << '\n';
  }
  return os.str();
}

inline void write_interactions(const InteractionDataset& ds,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write file: " + path);
  }
  for (const auto& it : ds.interactions) {
    out << it.user << '\t' << it.item << '\t';
    if (it.rating) {
      out << fmt_double(*it.rating);
    }
    if (it.timestamp) {
      out << '\t' << *it.timestamp;
    }
    out << '\n';
  }
}

}  // namespace dpfr

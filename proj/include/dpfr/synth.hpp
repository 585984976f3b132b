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

#include "dpfr/runs.hpp"

namespace dpfr {

// Deterministic synthetic instances: a split dataset plus a spectrum of runs
// from relevance-maximal to round-robin, for property tests and desk-scale
// experiments.
struct SynthSpec {
  int m = 4;             // users
  int n = 6;             // items
  int k = 3;             // evaluation cutoff
  int list_len = 3;      // items per generated run list (k')
  double skew = 1.0;     // power-law exponent of item popularity
  int rel_min = 1;       // relevant items per user: min / median / max
  int rel_median = 2;
  int rel_max = 4;
  int hist_min = 1;      // train/val history size per user
  int hist_max = 2;
  int num_runs = 16;
  std::uint64_t seed = 1;

  static SynthSpec tiny(std::uint64_t seed = 1) {
    SynthSpec s;
    s.seed = seed;
    return s;
  }

  static SynthSpec mid(std::uint64_t seed = 1) {
    SynthSpec s;
    s.m = 200;
    s.n = 300;
    s.k = 10;
    s.list_len = 25;
    s.skew = 1.0;
    s.rel_min = 2;
    s.rel_median = 5;
    s.rel_max = 12;
    s.hist_min = 5;
    s.hist_max = 10;
    s.seed = seed;
    return s;
  }
};

struct SynthInstance {
  SplitDataset split;
  std::vector<RunTable> runs;
};

// A popularity-biased run: every user gets the same most-popular head items
// (their history skipped) followed by a user-rotated tail of rarer items.
// Exposure at the head depth concentrates on a few items while deeper slots
// stay diverse, which is the regime fairness re-rankers are meant to fix.
inline RunTable popularity_run(const SplitDataset& split, int head_len,
                               int list_len,
                               const std::string& tag = "popular") {
  std::map<UserId, std::vector<RunEntry>> per_user;
  int n = split.num_items();
  for (std::size_t pos = 0; pos < split.test_users.size(); ++pos) {
    UserId u = split.test_users[pos];
    auto& entries = per_user[u];
    std::vector<bool> in_list(n, false);
    for (ItemId i = 0; i < n && static_cast<int>(entries.size()) < head_len;
         ++i) {
      if (!contains_sorted(split.history[u], i)) {
        entries.push_back({i, 1.0 / (entries.size() + 1.0)});
        in_list[i] = true;
      }
    }
    ItemId cursor = static_cast<ItemId>((pos * 37 + head_len) % n);
    for (int probe = 0; probe < n && static_cast<int>(entries.size()) < list_len;
         ++probe) {
      ItemId i = static_cast<ItemId>((cursor + probe) % n);
      if (!in_list[i] && !contains_sorted(split.history[u], i)) {
        entries.push_back({i, 1.0 / (entries.size() + 1.0)});
        in_list[i] = true;
      }
    }
    if (static_cast<int>(entries.size()) < list_len) {
      throw Error("popularity run cannot fill " + std::to_string(list_len) +
                  " items for user '" + split.users[u] + "'");
    }
  }
  return make_run_table(tag, split, per_user);
}

namespace detail {

inline std::string padded_id(char prefix, int i, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%0*d", prefix, width, i);
  return std::string(buf);
}

// Weighted draw without replacement via repeated inverse-CDF sampling.
class WeightedSampler {
public:
  WeightedSampler(int n, double skew) : weights_(n) {
    for (int i = 0; i < n; ++i) {
      weights_[i] = std::pow(static_cast<double>(i + 1), -skew);
    }
  }

  ItemId draw(Rng& rng, const std::vector<bool>& taken) const {
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (!taken[i]) {
        total += weights_[i];
      }
    }
    double x = rng.unit() * total;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (taken[i]) {
        continue;
      }
      x -= weights_[i];
      if (x <= 0) {
        return static_cast<ItemId>(i);
      }
    }
    for (std::size_t i = weights_.size(); i-- > 0;) {
      if (!taken[i]) {
        return static_cast<ItemId>(i);
      }
    }
    throw Error("weighted sampler exhausted");
  }

private:
  std::vector<double> weights_;
};

}  // namespace detail

inline SynthInstance generate(const SynthSpec& spec) {
  if (spec.m < 1 || spec.n < 2 || spec.k < 1) {
    throw Error("infeasible spec: need m >= 1, n >= 2, k >= 1");
  }
  if (spec.n < spec.k + spec.hist_max) {
    throw Error("infeasible spec: n must be at least k + max history size");
  }
  if (spec.list_len < spec.k || spec.n < spec.list_len + spec.hist_max) {
    throw Error("infeasible spec: list length must fit between k and "
                "n - max history size");
  }
  if (!(spec.rel_min >= 1 && spec.rel_min <= spec.rel_median &&
        spec.rel_median <= spec.rel_max &&
        spec.rel_max + spec.hist_max <= spec.n)) {
    throw Error("infeasible spec: bad relevant-items distribution");
  }

  Rng rng(spec.seed);
  SynthInstance inst;
  SplitDataset& sd = inst.split;
  int uw = spec.m >= 1000 ? 5 : 4;
  int iw = spec.n >= 1000 ? 5 : 4;
  for (int u = 0; u < spec.m; ++u) {
    sd.users.push_back(detail::padded_id('u', u, uw));
    sd.user_index[sd.users.back()] = u;
  }
  for (int i = 0; i < spec.n; ++i) {
    sd.items.push_back(detail::padded_id('i', i, iw));
    sd.item_index[sd.items.back()] = i;
  }
  sd.train.assign(spec.m, {});
  sd.val.assign(spec.m, {});
  sd.test.assign(spec.m, {});
  sd.history.assign(spec.m, {});

  // Some user must stay able to take every item, or the uniform exposure
  // bound ⌈km/n⌉ is unreachable: cap how many histories an item may join.
  std::int64_t bound = ceil_div(static_cast<std::int64_t>(spec.k) * spec.m,
                                spec.n);
  std::int64_t hist_cap = spec.m - bound;
  if (hist_cap < 1) {
    throw Error("infeasible spec: every item would exceed its history cap");
  }
  std::vector<std::int64_t> hist_load(spec.n, 0);

  detail::WeightedSampler sampler(spec.n, spec.skew);
  for (int u = 0; u < spec.m; ++u) {
    std::vector<bool> taken(spec.n, false);
    int h = spec.hist_min +
            static_cast<int>(rng.below(spec.hist_max - spec.hist_min + 1));
    for (int t = 0; t < h; ++t) {
      std::vector<bool> blocked = taken;
      bool any = false;
      for (int i = 0; i < spec.n; ++i) {
        if (hist_load[i] >= hist_cap) {
          blocked[i] = true;
        }
        any = any || !blocked[i];
      }
      if (!any) {
        throw Error("infeasible spec: history caps exhausted");
      }
      ItemId i = sampler.draw(rng, blocked);
      taken[i] = true;
      ++hist_load[i];
      sd.train[u].push_back(i);
    }
    int r;
    if (rng.below(2) == 0) {
      r = spec.rel_min +
          static_cast<int>(rng.below(spec.rel_median - spec.rel_min + 1));
    } else {
      r = spec.rel_median +
          static_cast<int>(rng.below(spec.rel_max - spec.rel_median + 1));
    }
    for (int t = 0; t < r; ++t) {
      ItemId i = sampler.draw(rng, taken);
      taken[i] = true;
      sd.test[u].push_back(i);
    }
    std::sort(sd.train[u].begin(), sd.train[u].end());
    std::sort(sd.test[u].begin(), sd.test[u].end());
    sd.history[u] = sd.train[u];
    sd.test_users.push_back(u);
  }

  // Items by descending popularity weight: the shared filler order of the
  // relevance-maximal run.
  std::vector<ItemId> by_pop(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    by_pop[i] = i;
  }
  // weights are decreasing in the id, so this is just the identity; kept
  // explicit in case the weighting changes.
  std::stable_sort(by_pop.begin(), by_pop.end(), [&](ItemId a, ItemId b) {
    return std::pow(a + 1.0, -spec.skew) > std::pow(b + 1.0, -spec.skew);
  });

  // Runs blend two item streams per user: the user's relevant items followed
  // by globally popular filler ("relevance stream"), and a global round-robin
  // cursor ("fairness stream"). Run j draws each slot from the fairness
  // stream with probability j/(num_runs−1).
  for (int j = 0; j < spec.num_runs; ++j) {
    double q = spec.num_runs > 1
                   ? static_cast<double>(j) / (spec.num_runs - 1)
                   : 0.0;
    Rng run_rng(spec.seed * 7919 + static_cast<std::uint64_t>(j) + 1);
    ItemId cursor = 0;
    std::map<UserId, std::vector<RunEntry>> per_user;
    for (int u = 0; u < spec.m; ++u) {
      std::vector<bool> in_list(spec.n, false);
      std::vector<ItemId> list;
      auto blocked = [&](ItemId i) {
        return in_list[i] || contains_sorted(sd.history[u], i);
      };
      std::size_t rel_next = 0, pop_next = 0;
      auto next_relevance = [&]() -> ItemId {
        while (rel_next < sd.test[u].size()) {
          ItemId i = sd.test[u][rel_next++];
          if (!blocked(i)) {
            return i;
          }
        }
        while (pop_next < by_pop.size()) {
          ItemId i = by_pop[pop_next++];
          if (!blocked(i)) {
            return i;
          }
        }
        return -1;
      };
      auto next_fair = [&]() -> ItemId {
        for (int probe = 0; probe < spec.n; ++probe) {
          ItemId i = cursor;
          cursor = static_cast<ItemId>((cursor + 1) % spec.n);
          if (!blocked(i)) {
            return i;
          }
        }
        return -1;
      };
      while (static_cast<int>(list.size()) < spec.list_len) {
        ItemId pick = run_rng.unit() < q ? next_fair() : next_relevance();
        if (pick < 0) {
          pick = next_relevance();
        }
        if (pick < 0) {
          pick = next_fair();
        }
        if (pick < 0) {
          throw Error("infeasible spec: cannot fill run list");
        }
        in_list[pick] = true;
        list.push_back(pick);
      }
      auto& entries = per_user[u];
      for (std::size_t p = 0; p < list.size(); ++p) {
        entries.push_back({list[p], 1.0 / static_cast<double>(p + 1)});
      }
    }
    std::string tag = j == 0 ? "relmax"
                     : j == spec.num_runs - 1 ? "roundrobin"
                                              : "mix" + std::to_string(j);
    inst.runs.push_back(make_run_table(tag, sd, per_user));
  }
  return inst;
}

}  // namespace dpfr

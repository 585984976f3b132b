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

namespace detail {

inline void require_lists(const RunTable& run, int kprime) {
  for (std::size_t r = 0; r < run.lists.size(); ++r) {
    if (run.lists[r].size() < static_cast<std::size_t>(kprime)) {
      throw Error("re-ranking needs k'=" + std::to_string(kprime) +
                  " items per user; user '" + run.user_names[r] + "' has " +
                  std::to_string(run.lists[r].size()));
    }
  }
}

// Appearance counts over the top-`depth` prefix of every list.
inline std::vector<std::int64_t> coverage(const RunTable& run, int depth) {
  std::vector<std::int64_t> cov(run.num_items, 0);
  for (const auto& list : run.lists) {
    int take = std::min<int>(depth, static_cast<int>(list.size()));
    for (int p = 0; p < take; ++p) {
      ++cov[list[p].item];
    }
  }
  return cov;
}

inline RunTable trimmed_copy(const RunTable& run, int kprime,
                             const std::string& suffix) {
  RunTable out;
  out.tag = run.tag + suffix;
  out.users = run.users;
  out.user_names = run.user_names;
  out.num_items = run.num_items;
  out.dropped_users = run.dropped_users;
  out.lists.resize(run.lists.size());
  for (std::size_t r = 0; r < run.lists.size(); ++r) {
    out.lists[r].assign(run.lists[r].begin(), run.lists[r].begin() + kprime);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Greedy substitution

struct SwapCandidate {
  ItemId popular;
  ItemId replacement;
  std::size_t row;  // row in the run table
  double loss;      // predicted-score drop if the swap is applied
};

struct GsOptions {
  double beta = 0.05;          // quantile for popular / unpopular item sets
  double replace_frac = 0.25;  // fraction of k'·m slots to attempt
  // Per-user item sets (indexed by dense user id, sorted) that must never be
  // swapped into that user's list; typically the train/val history.
  const std::vector<std::vector<ItemId>>* forbidden = nullptr;
};

struct GsResult {
  RunTable run;
  std::uint64_t attempted = 0;
  std::uint64_t applied = 0;
  std::uint64_t skipped = 0;
  std::vector<SwapCandidate> candidates;  // sorted by ascending loss
};

// All (popular, replacement, user) swap candidates under the beta rank
// quantiles of top-k' coverage, sorted from smallest relevance loss. The
// replacement's predicted score for a user that has never seen it falls back
// to the minimum score in that user's list.
inline std::vector<SwapCandidate> gs_candidates(const RunTable& run,
                                                int kprime, double beta) {
  auto cov = detail::coverage(run, kprime);
  std::vector<ItemId> active;
  for (ItemId i = 0; i < static_cast<ItemId>(cov.size()); ++i) {
    if (cov[i] > 0) {
      active.push_back(i);
    }
  }
  std::size_t quant = static_cast<std::size_t>(
      std::ceil(beta * static_cast<double>(active.size())));
  quant = std::min(quant, active.size());
  if (quant == 0) {
    return {};
  }
  std::vector<ItemId> by_desc = active, by_asc = active;
  std::sort(by_desc.begin(), by_desc.end(), [&](ItemId a, ItemId b) {
    if (cov[a] != cov[b]) {
      return cov[a] > cov[b];
    }
    return a < b;
  });
  std::sort(by_asc.begin(), by_asc.end(), [&](ItemId a, ItemId b) {
    if (cov[a] != cov[b]) {
      return cov[a] < cov[b];
    }
    return a < b;
  });
  std::vector<ItemId> popular(by_desc.begin(), by_desc.begin() + quant);
  std::vector<ItemId> least(by_asc.begin(), by_asc.begin() + quant);
  std::vector<bool> is_popular(cov.size(), false);
  for (ItemId i : popular) {
    is_popular[i] = true;
  }

  std::vector<SwapCandidate> out;
  for (std::size_t r = 0; r < run.lists.size(); ++r) {
    double min_score = run.lists[r][kprime - 1].score;
    std::unordered_map<ItemId, double> score_of;
    for (int p = 0; p < kprime; ++p) {
      const auto& e = run.lists[r][p];
      min_score = std::min(min_score, e.score);
      score_of[e.item] = e.score;
    }
    for (int p = 0; p < kprime; ++p) {
      ItemId i = run.lists[r][p].item;
      if (!is_popular[i]) {
        continue;
      }
      for (ItemId j : least) {
        if (j == i) {
          continue;
        }
        auto it = score_of.find(j);
        double sj = it != score_of.end() ? it->second : min_score;
        out.push_back({i, j, r, run.lists[r][p].score - sj});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SwapCandidate& a, const SwapCandidate& b) {
              if (a.loss != b.loss) {
                return a.loss < b.loss;
              }
              if (a.popular != b.popular) {
                return a.popular < b.popular;
              }
              if (a.replacement != b.replacement) {
                return a.replacement < b.replacement;
              }
              return a.row < b.row;
            });
  return out;
}

// Attempts the first ⌊replace_frac·k'·m⌋ candidate swaps in ascending-loss
// order. A swap replaces the popular item with the replacement at the same
// position of that one user's list; it is skipped when the popular item has
// already left the list, the replacement has already entered it, or the
// replacement is forbidden for the user.
inline GsResult greedy_substitution(const RunTable& run, int kprime,
                                    const GsOptions& opt = {}) {
  detail::require_lists(run, kprime);
  GsResult res;
  res.run = detail::trimmed_copy(run, kprime, "-gs");
  res.candidates = gs_candidates(res.run, kprime, opt.beta);

  std::uint64_t budget = static_cast<std::uint64_t>(
      opt.replace_frac * static_cast<double>(kprime) *
      static_cast<double>(run.num_users()));
  std::uint64_t limit = std::min<std::uint64_t>(budget, res.candidates.size());

  for (std::uint64_t c = 0; c < limit; ++c) {
    const auto& cand = res.candidates[c];
    ++res.attempted;
    auto& list = res.run.lists[cand.row];
    auto pos = std::find_if(list.begin(), list.end(), [&](const RunEntry& e) {
      return e.item == cand.popular;
    });
    bool has_replacement =
        std::find_if(list.begin(), list.end(), [&](const RunEntry& e) {
          return e.item == cand.replacement;
        }) != list.end();
    bool forbidden =
        opt.forbidden != nullptr &&
        contains_sorted((*opt.forbidden)[res.run.users[cand.row]],
                        cand.replacement);
    if (pos == list.end() || has_replacement || forbidden) {
      ++res.skipped;
      continue;
    }
    pos->item = cand.replacement;  // keeps the slot's score and rank
    ++res.applied;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Rank fusion re-rankers. Both fuse, per user, the score-ordered list with a
// ranking by ascending top-k coverage across all users, and re-order the
// user's top-k' only.

namespace detail {

// Positions of the user's k' items when ranked by ascending coverage, ties
// keeping the original order.
inline std::vector<int> coverage_order(const std::vector<RunEntry>& list,
                                       int kprime,
                                       const std::vector<std::int64_t>& cov) {
  std::vector<int> idx(kprime);
  for (int p = 0; p < kprime; ++p) {
    idx[p] = p;
  }
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return cov[list[a].item] < cov[list[b].item];
  });
  return idx;
}

}  // namespace detail

// CombMNZ fusion of relevance and coverage. Relevance scores are min-max
// normalised within the user (uniform 0.5 when degenerate); the coverage
// ranking scores 1 − min-max-normalised top-k coverage (all 1 when no item is
// covered). The fused score is the sum times the number of the two rankings
// whose top-k contains the item.
inline RunTable combmnz(const RunTable& run, int k, int kprime) {
  detail::require_lists(run, kprime);
  auto cov = detail::coverage(run, k);
  std::int64_t cmin = 0, cmax = 0;
  if (!cov.empty()) {
    cmin = *std::min_element(cov.begin(), cov.end());
    cmax = *std::max_element(cov.begin(), cov.end());
  }
  auto cov_norm = [&](ItemId i) {
    if (cmax == cmin) {
      return 0.0;  // all-equal coverage carries no signal
    }
    return static_cast<double>(cov[i] - cmin) / static_cast<double>(cmax - cmin);
  };

  RunTable out = detail::trimmed_copy(run, kprime, "-cm");
  for (std::size_t r = 0; r < out.lists.size(); ++r) {
    auto& list = out.lists[r];
    double smin = list.front().score, smax = list.front().score;
    for (const auto& e : list) {
      smin = std::min(smin, e.score);
      smax = std::max(smax, e.score);
    }
    auto rel_norm = [&](double s) {
      if (smax == smin) {
        return 0.5;
      }
      return (s - smin) / (smax - smin);
    };
    auto cov_rank = detail::coverage_order(list, kprime, cov);
    std::vector<bool> in_cov_topk(kprime, false);
    for (int p = 0; p < std::min(k, kprime); ++p) {
      in_cov_topk[cov_rank[p]] = true;
    }
    std::vector<double> fused(kprime);
    for (int p = 0; p < kprime; ++p) {
      int mnz = (p < k ? 1 : 0) + (in_cov_topk[p] ? 1 : 0);
      double s1 = rel_norm(list[p].score);
      double s2 = 1.0 - cov_norm(list[p].item);
      fused[p] = (s1 + s2) * mnz;
    }
    std::vector<int> order(kprime);
    for (int p = 0; p < kprime; ++p) {
      order[p] = p;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fused[a] > fused[b]; });
    std::vector<RunEntry> next(kprime);
    for (int p = 0; p < kprime; ++p) {
      next[p] = {list[order[p]].item, fused[order[p]]};
    }
    list = std::move(next);
  }
  return out;
}

// Borda-count fusion: in each of the two rankings the item at 0-indexed
// position p earns k'−p points; output is ordered by total points, ties
// keeping the original order.
inline RunTable borda_count(const RunTable& run, int k, int kprime) {
  detail::require_lists(run, kprime);
  auto cov = detail::coverage(run, k);
  RunTable out = detail::trimmed_copy(run, kprime, "-bc");
  for (std::size_t r = 0; r < out.lists.size(); ++r) {
    auto& list = out.lists[r];
    auto cov_rank = detail::coverage_order(list, kprime, cov);
    std::vector<double> points(kprime, 0.0);
    for (int p = 0; p < kprime; ++p) {
      points[p] += kprime - p;            // original ranking
      points[cov_rank[p]] += kprime - p;  // coverage ranking
    }
    std::vector<int> order(kprime);
    for (int p = 0; p < kprime; ++p) {
      order[p] = p;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return points[a] > points[b]; });
    std::vector<RunEntry> next(kprime);
    for (int p = 0; p < kprime; ++p) {
      next[p] = {list[order[p]].item, points[order[p]]};
    }
    list = std::move(next);
  }
  return out;
}

}  // namespace dpfr

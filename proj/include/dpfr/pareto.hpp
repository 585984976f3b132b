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

#include <functional>
#include <limits>
#include <map>

#include "dpfr/measures.hpp"

namespace dpfr {

// Recommendation state during frontier generation: an ordered k-list per test
// user plus the exposure counts kept in sync with it.
struct RecState {
  std::vector<UserId> users;                // ascending test users
  std::vector<std::vector<ItemId>> rec;     // aligned, each of length k
  std::vector<std::int64_t> exposure;       // per item
  int k = 0;

  std::int64_t max_exposure() const {
    std::int64_t m = 0;
    for (auto c : exposure) {
      m = std::max(m, c);
    }
    return m;
  }
};

inline ExposureVector state_exposure(const RecState& st) {
  ExposureVector ev;
  ev.k = st.k;
  ev.m = static_cast<int>(st.users.size());
  ev.counts = st.exposure;
  return ev;
}

// ---------------------------------------------------------------------------
// Oracle: the empirically most relevant assignment.
//
// Users with exactly k relevant items receive exactly those. Users with more
// are handled in batches of equal |R*| in ascending batch order; within a
// batch users are served by ascending weight (summed exposure of their
// already-recommended relevant items), each getting their not-yet-recommended
// relevant items first and the least-exposed already-recommended ones to
// fill. Users with fewer get all their relevant items at the top, then
// unexposed items outside their history, then the least popular recommended
// items outside history ∪ relevant ∪ list. Popularity is re-read after every
// assignment. Ties are always broken toward the lowest item id.
inline RecState oracle(const SplitDataset& split, int k) {
  RecState st;
  st.k = k;
  st.users = split.test_users;
  int n = split.num_items();
  st.exposure.assign(n, 0);

  // Fail fast on the pathological case where some user cannot be given k
  // items outside their history at all.
  for (UserId u : st.users) {
    if (n - static_cast<int>(split.history[u].size()) < k) {
      throw Error("edge case: cannot fill list: user '" + split.users[u] +
                  "' has fewer than k=" + std::to_string(k) +
                  " recommendable items");
    }
  }

  st.rec.assign(st.users.size(), {});
  std::size_t max_rel = 0;
  for (std::size_t r = 0; r < st.users.size(); ++r) {
    max_rel = std::max(max_rel, split.relevant(st.users[r]).size());
  }

  auto assign = [&](std::size_t row, std::vector<ItemId> items) {
    for (ItemId i : items) {
      ++st.exposure[i];
    }
    st.rec[row] = std::move(items);
  };

  // Users with |R*| = k.
  for (std::size_t r = 0; r < st.users.size(); ++r) {
    const auto& rel = split.relevant(st.users[r]);
    if (static_cast<int>(rel.size()) == k) {
      assign(r, rel);
    }
  }

  // Users with |R*| = K for K = k+1 .. max|R*|.
  for (std::size_t K = k + 1; K <= max_rel; ++K) {
    std::vector<std::size_t> batch;
    for (std::size_t r = 0; r < st.users.size(); ++r) {
      if (split.relevant(st.users[r]).size() == K) {
        batch.push_back(r);
      }
    }
    if (batch.empty()) {
      continue;
    }
    std::vector<std::vector<ItemId>> taken(batch.size()), fresh(batch.size());
    std::vector<std::int64_t> weight(batch.size(), 0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      for (ItemId i : split.relevant(st.users[batch[b]])) {
        if (st.exposure[i] > 0) {
          taken[b].push_back(i);
          weight[b] += st.exposure[i];
        } else if (static_cast<int>(fresh[b].size()) < k) {
          fresh[b].push_back(i);
        }
      }
    }
    std::vector<std::size_t> order(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      order[b] = b;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (weight[a] != weight[b]) {
        return weight[a] < weight[b];
      }
      return batch[a] < batch[b];
    });
    for (std::size_t b : order) {
      std::vector<ItemId> items = fresh[b];
      int need = k - static_cast<int>(items.size());
      std::sort(taken[b].begin(), taken[b].end(), [&](ItemId a, ItemId c) {
        if (st.exposure[a] != st.exposure[c]) {
          return st.exposure[a] < st.exposure[c];
        }
        return a < c;
      });
      items.insert(items.end(), taken[b].begin(),
                   taken[b].begin() + std::min<std::size_t>(need, taken[b].size()));
      if (static_cast<int>(items.size()) != k) {
        throw Error("edge case: cannot fill list for user '" +
                    split.users[st.users[batch[b]]] + "'");
      }
      assign(batch[b], std::move(items));
    }
  }

  // Users with |R*| < k: relevant items first, then fillers.
  std::vector<std::size_t> remain;
  for (std::size_t r = 0; r < st.users.size(); ++r) {
    const auto& rel = split.relevant(st.users[r]);
    if (static_cast<int>(rel.size()) < k) {
      st.rec[r] = rel;
      for (ItemId i : rel) {
        ++st.exposure[i];
      }
      remain.push_back(r);
    }
  }
  for (std::size_t r : remain) {
    UserId u = st.users[r];
    auto& list = st.rec[r];
    // Unexposed items outside the history, ascending id.
    for (ItemId i = 0; i < n && static_cast<int>(list.size()) < k; ++i) {
      if (st.exposure[i] == 0 && !contains_sorted(split.history[u], i)) {
        list.push_back(i);
        ++st.exposure[i];
      }
    }
    // Least popular recommended items outside history ∪ relevant ∪ list,
    // with popularity re-read after each pick.
    while (static_cast<int>(list.size()) < k) {
      ItemId best = -1;
      for (ItemId i = 0; i < n; ++i) {
        if (st.exposure[i] <= 0 || contains_sorted(split.history[u], i) ||
            contains_sorted(split.relevant(u), i) ||
            std::find(list.begin(), list.end(), i) != list.end()) {
          continue;
        }
        if (best < 0 || st.exposure[i] < st.exposure[best]) {
          best = i;
        }
      }
      if (best < 0) {
        throw Error("edge case: cannot fill list for user '" + split.users[u] +
                    "'");
      }
      list.push_back(best);
      ++st.exposure[best];
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// Checkpoint plan for frontier generation.

struct CheckpointPlan {
  bool full = false;
  std::uint64_t stride = 0;  // 0 means only step 0
  std::uint64_t last = 0;
  std::int64_t num_rep = 0;  // estimated replacements

  bool contains(std::uint64_t step) const {
    if (full) {
      return true;
    }
    if (stride == 0) {
      return step == 0;
    }
    return step % stride == 0 && step <= last;
  }

  static CheckpointPlan every_step() {
    CheckpointPlan p;
    p.full = true;
    return p;
  }
};

// Estimates the total number of replacements as the exposure mass above the
// uniform bound ⌈km/n⌉ and spreads p checkpoints a fixed stride apart:
// {0, stride, …, (p−1)·stride} with stride = numRep div (p−1).
inline CheckpointPlan plan_checkpoints(const ExposureVector& initial, int k,
                                       int m, int n, int p) {
  if (p < 2) {
    throw Error("checkpoint plan needs p >= 2");
  }
  std::int64_t bound = ceil_div(static_cast<std::int64_t>(k) * m, n);
  std::int64_t num_rep = 0;
  for (auto c : initial.counts) {
    num_rep += std::max<std::int64_t>(0, c - bound);
  }
  CheckpointPlan plan;
  plan.num_rep = num_rep;
  if (num_rep == 0) {
    return plan;  // single checkpoint at step 0
  }
  plan.stride = std::max<std::int64_t>(1, num_rep / (p - 1));
  plan.last = plan.stride * static_cast<std::uint64_t>(p - 1);
  return plan;
}

// ---------------------------------------------------------------------------
// Oracle2Fair: iterative replacement toward the fairest recommendation.

struct PfRecord {
  std::uint64_t step = 0;
  std::map<Measure, double> values;
};

struct PfTrace {
  std::vector<PfRecord> records;
  RecState final_state;
  std::uint64_t replacements = 0;
  std::uint64_t phase1 = 0;
  std::uint64_t phase2 = 0;
};

namespace detail {

// Measures evaluated on a RecState. Per-user relevance values are cached and
// only the touched user is refreshed; means are re-summed in user order each
// time so recorded values do not depend on the update history.
class StateScorer {
public:
  StateScorer(const SplitDataset& split, const RecState& st,
              std::vector<Measure> measures)
      : split_(&split), st_(&st), measures_(std::move(measures)) {
    for (Measure m : measures_) {
      if (is_joint(m)) {
        throw Error("frontier generation uses Rel and Fair measures only");
      }
      if (is_rel(m)) {
        rel_.push_back(m);
      } else {
        fair_.push_back(m);
      }
    }
    per_user_.assign(rel_.size(),
                     std::vector<double>(st.users.size(), 0.0));
    for (std::size_t r = 0; r < st.users.size(); ++r) {
      refresh_user(r);
    }
  }

  void refresh_user(std::size_t row) {
    const auto& rel_items = split_->relevant(st_->users[row]);
    std::span<const ItemId> topk(st_->rec[row].data(), st_->rec[row].size());
    for (std::size_t j = 0; j < rel_.size(); ++j) {
      per_user_[j][row] = per_user_rel(rel_[j], topk, rel_items);
    }
  }

  std::map<Measure, double> scores() const {
    std::map<Measure, double> out;
    for (std::size_t j = 0; j < rel_.size(); ++j) {
      double sum = 0.0;
      for (double v : per_user_[j]) {
        sum += v;
      }
      out[rel_[j]] = sum / static_cast<double>(per_user_[j].size());
    }
    if (!fair_.empty()) {
      ExposureVector ev;
      ev.k = st_->k;
      ev.m = static_cast<int>(st_->users.size());
      ev.counts = st_->exposure;
      for (Measure m : fair_) {
        out[m] = fair_score(m, ev);
      }
    }
    return out;
  }

private:
  const SplitDataset* split_;
  const RecState* st_;
  std::vector<Measure> measures_;
  std::vector<Measure> rel_;
  std::vector<Measure> fair_;
  std::vector<std::vector<double>> per_user_;
};

inline ItemId most_popular(const std::vector<std::int64_t>& exposure) {
  ItemId best = 0;
  for (ItemId i = 1; i < static_cast<ItemId>(exposure.size()); ++i) {
    if (exposure[i] > exposure[best]) {
      best = i;
    }
  }
  return best;
}

// Candidate incoming items for one equalising move, by the replacement
// priority: lowest exposure first (covering still-unexposed items), lowest id
// on ties. Only items below `bound` keep the move strictly equalising.
inline std::vector<ItemId> incoming_candidates(
    const std::vector<std::int64_t>& exposure, ItemId skip,
    std::int64_t bound) {
  std::vector<ItemId> cands;
  for (ItemId i = 0; i < static_cast<ItemId>(exposure.size()); ++i) {
    if (i != skip && exposure[i] < bound) {
      cands.push_back(i);
    }
  }
  std::sort(cands.begin(), cands.end(), [&](ItemId a, ItemId b) {
    if (exposure[a] != exposure[b]) {
      return exposure[a] < exposure[b];
    }
    return a < b;
  });
  return cands;
}

// Holders of `item`, ordered by its rank position from the bottom of the list
// upward; ties toward the lower row.
inline std::vector<std::size_t> holders_bottom_first(const RecState& st,
                                                     ItemId item) {
  std::vector<std::pair<int, std::size_t>> found;
  for (std::size_t r = 0; r < st.rec.size(); ++r) {
    for (int p = 0; p < static_cast<int>(st.rec[r].size()); ++p) {
      if (st.rec[r][p] == item) {
        found.push_back({p, r});
        break;
      }
    }
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) {
                return a.first > b.first;
              }
              return a.second < b.second;
            });
  std::vector<std::size_t> rows;
  rows.reserve(found.size());
  for (const auto& [pos, row] : found) {
    rows.push_back(row);
  }
  return rows;
}

// Replace `from` with `to` in the user's list and move relevant items back to
// the top, keeping the relative order within the relevant and non-relevant
// groups.
inline void replace_and_reorder(RecState& st, const SplitDataset& split,
                                std::size_t row, ItemId from, ItemId to) {
  auto& list = st.rec[row];
  auto it = std::find(list.begin(), list.end(), from);
  *it = to;
  --st.exposure[from];
  ++st.exposure[to];
  const auto& rel = split.relevant(st.users[row]);
  std::stable_partition(list.begin(), list.end(), [&](ItemId i) {
    return contains_sorted(rel, i);
  });
}

}  // namespace detail

// Generates the score sequence from the Oracle state to the fairest state.
// Phase 1 gives every unexposed item a slot by evicting the current most
// popular item, preferring a holder for whom the incoming item is relevant,
// otherwise the holder with that item lowest in their list. Phase 2 repeats
// the same move with the least popular recommended item as the incoming one
// until no item is recommended more than ⌈km/n⌉ times. Scores are recorded at
// the planned checkpoints; step 0 is the Oracle itself.
inline PfTrace oracle_to_fair(const SplitDataset& split, int k,
                              const CheckpointPlan& plan,
                              const std::vector<Measure>& measures) {
  PfTrace trace;
  trace.final_state = oracle(split, k);
  RecState& st = trace.final_state;
  int n = split.num_items();
  std::int64_t m = static_cast<std::int64_t>(st.users.size());
  std::int64_t bound = ceil_div(static_cast<std::int64_t>(k) * m, n);

  detail::StateScorer scorer(split, st, measures);
  std::uint64_t step = 0;
  auto record = [&]() {
    if (plan.contains(step)) {
      trace.records.push_back({step, scorer.scores()});
    }
  };
  record();

  auto apply = [&](ItemId incoming, ItemId popular,
                   bool need_absent) -> bool {
    auto rows = detail::holders_bottom_first(st, popular);
    std::size_t chosen = SIZE_MAX;
    std::size_t fallback = SIZE_MAX;
    for (std::size_t row : rows) {
      UserId u = st.users[row];
      if (contains_sorted(split.history[u], incoming)) {
        continue;
      }
      if (need_absent &&
          std::find(st.rec[row].begin(), st.rec[row].end(), incoming) !=
              st.rec[row].end()) {
        continue;
      }
      if (fallback == SIZE_MAX) {
        fallback = row;
      }
      if (contains_sorted(split.relevant(u), incoming)) {
        chosen = row;
        break;
      }
    }
    if (chosen == SIZE_MAX) {
      chosen = fallback;
    }
    if (chosen == SIZE_MAX) {
      return false;
    }
    detail::replace_and_reorder(st, split, chosen, popular, incoming);
    scorer.refresh_user(chosen);
    ++step;
    record();
    return true;
  };

  // Phase 1: place every unexposed item (collected once; placements only
  // shrink the set because evicted items keep a positive count here).
  std::vector<ItemId> unexposed;
  for (ItemId i = 0; i < n; ++i) {
    if (st.exposure[i] == 0) {
      unexposed.push_back(i);
    }
  }
  for (ItemId i : unexposed) {
    ItemId pop = detail::most_popular(st.exposure);
    if (st.exposure[pop] <= 1) {
      break;  // every further move would only permute counts
    }
    if (apply(i, pop, /*need_absent=*/false)) {
      ++trace.phase1;
    }
    // An item whose every popular-holder has it in history is skipped.
  }

  // Phase 2: push the maximum count down to the uniform bound. Every applied
  // move takes one unit from an item above the bound and gives it to one
  // below, so the excess mass bounds the iteration count exactly; a pass in
  // which no candidate can be placed means the history constraints make the
  // bound unreachable.
  std::int64_t budget = 0;
  for (auto c : st.exposure) {
    budget += std::max<std::int64_t>(0, c - bound);
  }
  while (st.max_exposure() > bound) {
    ItemId pop = detail::most_popular(st.exposure);
    bool advanced = false;
    for (ItemId incoming : detail::incoming_candidates(st.exposure, pop, bound)) {
      if (apply(incoming, pop, /*need_absent=*/true)) {
        advanced = true;
        break;
      }
    }
    if (!advanced || budget <= 0) {
      throw Error(
          "edge case: replacement stalled before reaching the uniform "
          "exposure bound (train/val history too restrictive)");
    }
    ++trace.phase2;
    --budget;
  }

  trace.replacements = step;
  return trace;
}

// Convenience: points of one measure pair from a trace, tagged by step.
inline std::vector<ScorePoint> pf_points(const PfTrace& trace, Measure rel_m,
                                         Measure fair_m) {
  std::vector<ScorePoint> pts;
  pts.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    ScorePoint p;
    p.rel = rec.values.at(rel_m);
    p.fair = rec.values.at(fair_m);
    p.tag = std::to_string(rec.step);
    pts.push_back(std::move(p));
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Frontier assembly.

struct ParetoFrontier {
  std::vector<ScorePoint> points;  // descending rel, no dominated points
  Measure rel_measure = Measure::NDCG;
  Measure fair_measure = Measure::Gini;
  std::optional<double> gradient;
  bool fit = false;
};

// Collapses duplicate rel values keeping the best fair score, sorts by
// descending rel, removes dominated points, and derives the endpoint gradient
// Δfair/Δrel before pruning. A pair is fit when the gradient is defined and
// nonzero.
inline ParetoFrontier build_frontier(const std::vector<ScorePoint>& raw,
                                     Measure rel_m, Measure fair_m) {
  if (raw.empty()) {
    throw Error("cannot build a frontier from zero points");
  }
  ParetoFrontier pf;
  pf.rel_measure = rel_m;
  pf.fair_measure = fair_m;

  std::map<double, ScorePoint, std::greater<double>> by_rel;
  for (const auto& p : raw) {
    auto [it, inserted] = by_rel.emplace(p.rel, p);
    if (!inserted &&
        oriented(fair_m, p.fair) > oriented(fair_m, it->second.fair)) {
      it->second = p;
    }
  }
  std::vector<ScorePoint> dedup;
  dedup.reserve(by_rel.size());
  for (auto& [r, p] : by_rel) {
    dedup.push_back(std::move(p));
  }

  if (dedup.size() >= 2) {
    double drel = dedup.back().rel - dedup.front().rel;
    double dfair = dedup.back().fair - dedup.front().fair;
    if (drel != 0.0) {
      pf.gradient = dfair / drel;
    }
  }
  pf.fit = pf.gradient.has_value() && *pf.gradient != 0.0;

  double best = -std::numeric_limits<double>::infinity();
  for (auto& p : dedup) {
    double of = oriented(fair_m, p.fair);
    if (of > best) {
      best = of;
      pf.points.push_back(std::move(p));
    }
  }
  return pf;
}

// Pareto dominance with the fairness orientation of the pair; relevance is
// always higher-better.
inline bool dominates(const ScorePoint& a, const ScorePoint& b,
                      Measure fair_m) {
  double af = oriented(fair_m, a.fair), bf = oriented(fair_m, b.fair);
  return a.rel >= b.rel && af >= bf && (a.rel > b.rel || af > bf);
}

}  // namespace dpfr

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

#include <span>

#include "dpfr/runs.hpp"

namespace dpfr {

// Relevance measures are macro-averaged over users; fairness measures are
// computed on the item exposure vector; the joint measures combine per-item
// attention with per-user relevance.
enum class Measure {
  HR,
  MRR,
  P,
  R,
  MAP,
  NDCG,
  Jain,
  QF,
  Ent,
  FSat,
  Gini,
  IBO,
  MME,
  IAA,
  IIF,
  AIF,
};

inline const char* measure_name(Measure m) {
  switch (m) {
    case Measure::HR: return "HR";
    case Measure::MRR: return "MRR";
    case Measure::P: return "P";
    case Measure::R: return "R";
    case Measure::MAP: return "MAP";
    case Measure::NDCG: return "NDCG";
    case Measure::Jain: return "Jain";
    case Measure::QF: return "QF";
    case Measure::Ent: return "Ent";
    case Measure::FSat: return "FSat";
    case Measure::Gini: return "Gini";
    case Measure::IBO: return "IBO";
    case Measure::MME: return "MME";
    case Measure::IAA: return "IAA";
    case Measure::IIF: return "II-F";
    case Measure::AIF: return "AI-F";
  }
  return "?";
}

inline Measure parse_measure(std::string_view name) {
  static const std::pair<const char*, Measure> table[] = {
      {"HR", Measure::HR},     {"MRR", Measure::MRR}, {"P", Measure::P},
      {"R", Measure::R},       {"MAP", Measure::MAP}, {"NDCG", Measure::NDCG},
      {"Jain", Measure::Jain}, {"QF", Measure::QF},   {"Ent", Measure::Ent},
      {"FSat", Measure::FSat}, {"Gini", Measure::Gini}, {"IBO", Measure::IBO},
      {"MME", Measure::MME},   {"IAA", Measure::IAA}, {"II-F", Measure::IIF},
      {"AI-F", Measure::AIF},  {"IIF", Measure::IIF}, {"AIF", Measure::AIF},
  };
  for (const auto& [n, m] : table) {
    if (name == n) {
      return m;
    }
  }
  throw Error("unknown measure: " + std::string(name));
}

inline bool is_rel(Measure m) { return m <= Measure::NDCG; }
inline bool is_fair(Measure m) { return m >= Measure::Jain && m <= Measure::Gini; }
inline bool is_joint(Measure m) { return m >= Measure::IBO; }

inline bool higher_better(Measure m) {
  switch (m) {
    case Measure::Gini:
    case Measure::MME:
    case Measure::IAA:
    case Measure::IIF:
    case Measure::AIF:
      return false;
    default:
      return true;
  }
}

// Value mapped so that larger is always better; used for dominance and
// frontier pruning.
inline double oriented(Measure m, double v) {
  return higher_better(m) ? v : -v;
}

inline std::vector<Measure> rel_measures() {
  return {Measure::HR, Measure::MRR, Measure::P,
          Measure::R,  Measure::MAP, Measure::NDCG};
}

inline std::vector<Measure> fair_measures() {
  return {Measure::Jain, Measure::QF, Measure::Ent, Measure::FSat,
          Measure::Gini};
}

inline std::vector<Measure> joint_measures() {
  return {Measure::IBO, Measure::MME, Measure::IAA, Measure::IIF,
          Measure::AIF};
}

inline std::vector<Measure> all_measures() {
  std::vector<Measure> out = rel_measures();
  for (Measure m : fair_measures()) {
    out.push_back(m);
  }
  for (Measure m : joint_measures()) {
    out.push_back(m);
  }
  return out;
}

// A (relevance, fairness) score pair for one recommendation state.
struct ScorePoint {
  double rel = 0;
  double fair = 0;
  std::string tag;
};

// Rank discount shared by NDCG and the attention-based joint measures.
inline double position_weight(int rank1) {
  return 1.0 / std::log2(rank1 + 1.0);
}

// ---------------------------------------------------------------------------
// Relevance

// Per-user value of one relevance measure on a top-k prefix. `relevant` must
// be sorted. MAP and NDCG are normalised by min(|relevant|, k) so a user with
// fewer than k relevant items can still reach 1.
inline double per_user_rel(Measure m, std::span<const ItemId> topk,
                           const std::vector<ItemId>& relevant) {
  int k = static_cast<int>(topk.size());
  std::size_t nrel = relevant.size();
  if (nrel == 0) {
    return 0.0;
  }
  switch (m) {
    case Measure::HR: {
      for (ItemId i : topk) {
        if (contains_sorted(relevant, i)) {
          return 1.0;
        }
      }
      return 0.0;
    }
    case Measure::MRR: {
      for (int r = 0; r < k; ++r) {
        if (contains_sorted(relevant, topk[r])) {
          return 1.0 / (r + 1);
        }
      }
      return 0.0;
    }
    case Measure::P: {
      int hits = 0;
      for (ItemId i : topk) {
        hits += contains_sorted(relevant, i) ? 1 : 0;
      }
      return k > 0 ? static_cast<double>(hits) / k : 0.0;
    }
    case Measure::R: {
      int hits = 0;
      for (ItemId i : topk) {
        hits += contains_sorted(relevant, i) ? 1 : 0;
      }
      return static_cast<double>(hits) / static_cast<double>(nrel);
    }
    case Measure::MAP: {
      double ap = 0.0;
      int hits = 0;
      for (int r = 0; r < k; ++r) {
        if (contains_sorted(relevant, topk[r])) {
          ++hits;
          ap += static_cast<double>(hits) / (r + 1);
        }
      }
      double norm = static_cast<double>(std::min<std::size_t>(nrel, k));
      return norm > 0 ? ap / norm : 0.0;
    }
    case Measure::NDCG: {
      double dcg = 0.0;
      for (int r = 0; r < k; ++r) {
        if (contains_sorted(relevant, topk[r])) {
          dcg += position_weight(r + 1);
        }
      }
      double idcg = 0.0;
      int ideal = static_cast<int>(std::min<std::size_t>(nrel, k));
      for (int r = 0; r < ideal; ++r) {
        idcg += position_weight(r + 1);
      }
      return idcg > 0 ? dcg / idcg : 0.0;
    }
    default:
      throw Error("not a relevance measure");
  }
}

namespace detail {

inline std::vector<ItemId> topk_items(const std::vector<RunEntry>& list, int k) {
  int take = std::min<int>(k, static_cast<int>(list.size()));
  std::vector<ItemId> out(take);
  for (int i = 0; i < take; ++i) {
    out[i] = list[i].item;
  }
  return out;
}

}  // namespace detail

// Macro average over the run's users. Test users missing from the run are
// excluded (the run reports how many were dropped at load time).
inline double rel_score(Measure m, const RunTable& run,
                        const SplitDataset& split, int k, int threads = 1) {
  if (run.users.empty()) {
    return 0.0;
  }
  std::vector<double> vals(run.users.size(), 0.0);
  for_chunks(run.users.size(), threads, 256, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      auto topk = detail::topk_items(run.lists[r], k);
      vals[r] = per_user_rel(m, topk, split.relevant(run.users[r]));
    }
  });
  double sum = 0.0;
  for (double v : vals) {
    sum += v;
  }
  return sum / static_cast<double>(vals.size());
}

// ---------------------------------------------------------------------------
// Fairness (item exposure)

// Jain = (Σe)²/(n·Σe²); QF = share of items exposed at least once;
// Ent = −Σ p·ln p / ln n over exposed items; FSat = share of items exposed at
// least ⌊km/n⌋ times; Gini by the sorted-rank formula (equal to the
// mean-absolute-difference definition).
inline double fair_score(Measure m, const ExposureVector& exp) {
  const auto& e = exp.counts;
  std::size_t n = e.size();
  std::int64_t sum = exp.total();
  if (sum <= 0) {
    throw Error("exposure vector has zero total");
  }
  switch (m) {
    case Measure::Jain: {
      double sq = 0.0;
      for (auto c : e) {
        sq += static_cast<double>(c) * static_cast<double>(c);
      }
      double s = static_cast<double>(sum);
      return s * s / (static_cast<double>(n) * sq);
    }
    case Measure::QF: {
      std::size_t covered = 0;
      for (auto c : e) {
        covered += c > 0 ? 1 : 0;
      }
      return static_cast<double>(covered) / static_cast<double>(n);
    }
    case Measure::Ent: {
      if (n < 2) {
        throw Error("entropy needs at least two items");
      }
      double h = 0.0;
      for (auto c : e) {
        if (c > 0) {
          double p = static_cast<double>(c) / static_cast<double>(sum);
          h -= p * std::log(p);
        }
      }
      return h / std::log(static_cast<double>(n));
    }
    case Measure::FSat: {
      std::int64_t bound =
          (static_cast<std::int64_t>(exp.k) * exp.m) / static_cast<std::int64_t>(n);
      std::size_t sat = 0;
      for (auto c : e) {
        sat += c >= bound ? 1 : 0;
      }
      return static_cast<double>(sat) / static_cast<double>(n);
    }
    case Measure::Gini: {
      std::vector<std::int64_t> sorted(e);
      std::sort(sorted.begin(), sorted.end());
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += (2.0 * (i + 1) - n - 1) * static_cast<double>(sorted[i]);
      }
      return acc / (static_cast<double>(n) * static_cast<double>(sum));
    }
    default:
      throw Error("not a fairness measure");
  }
}

// ---------------------------------------------------------------------------
// Joint fairness+relevance
//
// All five use the same log discount w(r)=1/log2(1+r) and binary relevance.
// Per item i over the evaluated users:
//   attention a_i   = Σ_u w(rank_u(i))                    (any item shown)
//   impact  imp_i   = Σ_u w(rank_u(i)) · [i relevant to u] (merit-weighted)
//   merit   rel_i   = |{u : i ∈ R*_u}|
//
// IBO: share of items whose impact exceeds the expected impact under a
//      uniform random top-k policy, rel_i · Σ_{r≤k} w(r) / n.
// MME: mean over items of max_j max(0, imp_i(slots of j) − imp_i(own slots)),
//      per-user normalised; an item envies another if it would gain impact
//      from occupying the other's ranks.
// IAA: ½ Σ_i |â_i − r̂_i| between the normalised attention and merit
//      distributions; 0 iff attention is proportional to merit.
// II-F: mean squared per-(user, item) deviation between actual exposure
//      w(rank) and the target that splits the top-|R*_u| exposure mass evenly
//      over the relevant items (remaining mass evenly over the rest).
// AI-F: same deviation aggregated over users per item before squaring.
namespace detail {

struct JointInputs {
  int k = 0;
  int m = 0;
  int n = 0;
  std::vector<double> attention;  // a_i
  std::vector<double> impact;     // imp_i
  std::vector<double> merit;      // rel_i
  const RunTable* run = nullptr;
  const SplitDataset* split = nullptr;
};

inline JointInputs joint_inputs(const RunTable& run, const SplitDataset& split,
                                int k) {
  JointInputs ji;
  ji.k = k;
  ji.m = run.num_users();
  ji.n = run.num_items;
  ji.run = &run;
  ji.split = &split;
  ji.attention.assign(ji.n, 0.0);
  ji.impact.assign(ji.n, 0.0);
  ji.merit.assign(ji.n, 0.0);
  for (std::size_t r = 0; r < run.lists.size(); ++r) {
    if (run.lists[r].size() < static_cast<std::size_t>(k)) {
      throw Error("user '" + run.user_names[r] + "' has fewer than k items");
    }
    UserId u = run.users[r];
    const auto& rel = split.relevant(u);
    for (int p = 0; p < k; ++p) {
      ItemId i = run.lists[r][p].item;
      double w = position_weight(p + 1);
      ji.attention[i] += w;
      if (contains_sorted(rel, i)) {
        ji.impact[i] += w;
      }
    }
    for (ItemId i : rel) {
      ji.merit[i] += 1.0;
    }
  }
  return ji;
}

}  // namespace detail

inline double joint_score(Measure m, const RunTable& run,
                          const SplitDataset& split, int k) {
  auto ji = detail::joint_inputs(run, split, k);
  double n = static_cast<double>(ji.n);
  double mm = static_cast<double>(ji.m);
  switch (m) {
    case Measure::IBO: {
      double wk = 0.0;
      for (int r = 1; r <= k; ++r) {
        wk += position_weight(r);
      }
      std::size_t better = 0;
      for (int i = 0; i < ji.n; ++i) {
        double uniform = ji.merit[i] * wk / n;
        better += ji.impact[i] > uniform ? 1 : 0;
      }
      return static_cast<double>(better) / n;
    }
    case Measure::MME: {
      // For each item i, impact under item j's slots is Σ w·[i rel to u];
      // scan the users that consider i relevant once per i.
      std::vector<std::vector<std::size_t>> rel_rows(ji.n);
      for (std::size_t r = 0; r < ji.run->lists.size(); ++r) {
        UserId u = ji.run->users[r];
        for (ItemId i : ji.split->relevant(u)) {
          rel_rows[i].push_back(r);
        }
      }
      double total = 0.0;
      std::vector<double> util(ji.n, 0.0);
      for (int i = 0; i < ji.n; ++i) {
        if (rel_rows[i].empty()) {
          continue;  // nothing to envy: zero impact everywhere
        }
        std::fill(util.begin(), util.end(), 0.0);
        for (std::size_t r : rel_rows[i]) {
          for (int p = 0; p < k; ++p) {
            util[ji.run->lists[r][p].item] += position_weight(p + 1);
          }
        }
        double own = util[i];
        double best = 0.0;
        for (int j = 0; j < ji.n; ++j) {
          best = std::max(best, util[j]);
        }
        total += std::max(0.0, best - own) / mm;
      }
      return total / n;
    }
    case Measure::IAA: {
      double asum = 0.0, rsum = 0.0;
      for (int i = 0; i < ji.n; ++i) {
        asum += ji.attention[i];
        rsum += ji.merit[i];
      }
      double d = 0.0;
      for (int i = 0; i < ji.n; ++i) {
        double ahat = asum > 0 ? ji.attention[i] / asum : 0.0;
        double rhat = rsum > 0 ? ji.merit[i] / rsum : 0.0;
        d += std::abs(ahat - rhat);
      }
      return d / 2.0;
    }
    case Measure::IIF:
    case Measure::AIF: {
      std::vector<double> agg(ji.n, 0.0);
      std::vector<double> dev(ji.n, 0.0);
      double sq = 0.0;
      for (std::size_t r = 0; r < ji.run->lists.size(); ++r) {
        UserId u = ji.run->users[r];
        const auto& rel = ji.split->relevant(u);
        int nrel = static_cast<int>(rel.size());
        int top = std::min(nrel, k);
        double mass_rel = 0.0, mass_rest = 0.0;
        for (int r1 = 1; r1 <= k; ++r1) {
          (r1 <= top ? mass_rel : mass_rest) += position_weight(r1);
        }
        double target_rel = nrel > 0 ? mass_rel / nrel : 0.0;
        double target_rest = ji.n > nrel ? mass_rest / (ji.n - nrel) : 0.0;
        std::fill(dev.begin(), dev.end(), -target_rest);
        for (ItemId i : rel) {
          dev[i] = -target_rel;
        }
        for (int p = 0; p < k; ++p) {
          dev[ji.run->lists[r][p].item] += position_weight(p + 1);
        }
        for (int i = 0; i < ji.n; ++i) {
          sq += dev[i] * dev[i];
          agg[i] += dev[i];
        }
      }
      if (m == Measure::IIF) {
        return sq / (mm * n);
      }
      double out = 0.0;
      for (int i = 0; i < ji.n; ++i) {
        double mean_dev = agg[i] / mm;
        out += mean_dev * mean_dev;
      }
      return out / n;
    }
    default:
      throw Error("not a joint measure");
  }
}

}  // namespace dpfr

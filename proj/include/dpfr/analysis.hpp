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

#include "dpfr/measures.hpp"

namespace dpfr {

// Tie-corrected Kendall correlation (tau-b):
//   tau = (C − D) / sqrt((C + D + Ta) · (C + D + Tb))
// with Ta/Tb the pairs tied only in a/b. Undefined (nullopt) when either
// vector is entirely tied.
inline std::optional<double> kendall_tau(std::span<const double> a,
                                         std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error("kendall_tau needs two equal-length vectors of size >= 2");
  }
  std::int64_t concordant = 0, discordant = 0, tie_a = 0, tie_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double da = a[i] - a[j];
      double db = b[i] - b[j];
      if (da == 0 && db == 0) {
        continue;
      }
      if (da == 0) {
        ++tie_a;
      } else if (db == 0) {
        ++tie_b;
      } else if ((da > 0) == (db > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  double na = static_cast<double>(concordant + discordant + tie_a);
  double nb = static_cast<double>(concordant + discordant + tie_b);
  if (na == 0 || nb == 0) {
    return std::nullopt;
  }
  return static_cast<double>(concordant - discordant) / std::sqrt(na * nb);
}

// Rankings with tau at or above 0.9 are treated as equivalent; an undefined
// tau never is.
inline bool equivalence_flag(double tau) { return tau >= 0.9; }

inline bool equivalence_flag(std::optional<double> tau) {
  return tau.has_value() && equivalence_flag(*tau);
}

// Arithmetic mean of the relevance score and the fairness score oriented so
// that higher is better (1 − value for Gini).
inline double avg_baseline(double rel, double fair, Measure fair_measure) {
  double oriented_fair = higher_better(fair_measure) ? fair : 1.0 - fair;
  return (rel + oriented_fair) / 2.0;
}

// A best-to-worst ordering of runs under one evaluator. Scores are stored
// raw; the direction is normalised once here, so downstream comparisons
// always see higher-is-better values.
struct RunRanking {
  std::string evaluator;
  std::vector<std::string> run_tags;
  std::vector<double> scores;
  bool higher_is_better = true;

  std::vector<double> oriented_scores() const {
    std::vector<double> out = scores;
    if (!higher_is_better) {
      for (double& v : out) {
        v = -v;
      }
    }
    return out;
  }

  // Run tags from best to worst; ties keep input order.
  std::vector<std::string> order() const {
    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      idx[i] = i;
    }
    auto os = oriented_scores();
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return os[a] > os[b]; });
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
      out.push_back(run_tags[i]);
    }
    return out;
  }
};

inline std::optional<double> kendall_tau(const RunRanking& a,
                                         const RunRanking& b) {
  auto oa = a.oriented_scores();
  auto ob = b.oriented_scores();
  return kendall_tau(std::span<const double>(oa), std::span<const double>(ob));
}

// ---------------------------------------------------------------------------
// Best-model disagreement between distance-to-frontier evaluation and the
// fair/rel average of the same measure pair.

struct PairScores {
  Measure rel_measure;
  Measure fair_measure;
  std::vector<double> dpfr;  // per run, lower better
  std::vector<double> avg;   // per run, higher better
};

struct DisagreementReport {
  std::vector<int> flags;  // aligned with the input pairs, 1 = disagreement
  double pct_set = 0.0;    // pairs with a set-based rel measure (P, R)
  double pct_rank = 0.0;   // rank-based rel measure (MAP, NDCG)
  double pct_all = 0.0;
};

namespace detail {

// Indices achieving the best value; exact ties all count.
inline std::vector<std::size_t> arg_best(const std::vector<double>& v,
                                         bool minimize) {
  std::vector<std::size_t> best;
  double best_val = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double cur = minimize ? v[i] : -v[i];
    if (best.empty() || cur < best_val) {
      best.assign(1, i);
      best_val = cur;
    } else if (cur == best_val) {
      best.push_back(i);
    }
  }
  return best;
}

}  // namespace detail

// A pair disagrees when the best-run sets under the two evaluators do not
// intersect (ties count as agreement when any best run is shared).
inline DisagreementReport best_model_disagreement(
    const std::vector<PairScores>& pairs) {
  DisagreementReport rep;
  int n_set = 0, d_set = 0, n_rank = 0, d_rank = 0;
  for (const auto& p : pairs) {
    if (p.dpfr.size() != p.avg.size() || p.dpfr.empty()) {
      throw Error("disagreement needs the same nonempty run set per pair");
    }
    auto best_d = detail::arg_best(p.dpfr, /*minimize=*/true);
    auto best_a = detail::arg_best(p.avg, /*minimize=*/false);
    bool overlap = false;
    for (std::size_t i : best_d) {
      overlap = overlap ||
                std::find(best_a.begin(), best_a.end(), i) != best_a.end();
    }
    int flag = overlap ? 0 : 1;
    rep.flags.push_back(flag);
    bool set_based = p.rel_measure == Measure::P || p.rel_measure == Measure::R;
    if (set_based) {
      ++n_set;
      d_set += flag;
    } else {
      ++n_rank;
      d_rank += flag;
    }
  }
  rep.pct_set = n_set > 0 ? 100.0 * d_set / n_set : 0.0;
  rep.pct_rank = n_rank > 0 ? 100.0 * d_rank / n_rank : 0.0;
  int total = n_set + n_rank;
  rep.pct_all = total > 0 ? 100.0 * (d_set + d_rank) / total : 0.0;
  return rep;
}

}  // namespace dpfr

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

#include <doctest.h>

#include <cmath>
#include <set>

#include "dpfr/measures.hpp"
#include "dpfr/synth.hpp"

using namespace dpfr;

namespace {

constexpr double kTol = 1e-12;

SplitDataset bare_split(int m, int n,
                        const std::vector<std::vector<ItemId>>& relevant,
                        const std::vector<std::vector<ItemId>>& history = {}) {
  SplitDataset sd;
  for (int u = 0; u < m; ++u) {
    sd.users.push_back("u" + std::to_string(u));
    sd.user_index[sd.users.back()] = u;
  }
  for (int i = 0; i < n; ++i) {
    sd.items.push_back("i" + std::to_string(i));
    sd.item_index[sd.items.back()] = i;
  }
  sd.train.assign(m, {});
  sd.val.assign(m, {});
  sd.test.assign(m, {});
  sd.history.assign(m, {});
  for (int u = 0; u < m; ++u) {
    sd.test[u] = relevant[u];
    std::sort(sd.test[u].begin(), sd.test[u].end());
    if (!history.empty()) {
      sd.history[u] = history[u];
      std::sort(sd.history[u].begin(), sd.history[u].end());
      sd.train[u] = sd.history[u];
    }
    if (!sd.test[u].empty()) {
      sd.test_users.push_back(u);
    }
  }
  return sd;
}

RunTable table_from_lists(const SplitDataset& sd,
                          const std::vector<std::vector<ItemId>>& lists,
                          const std::string& tag = "t") {
  std::map<UserId, std::vector<RunEntry>> per_user;
  for (UserId u = 0; u < static_cast<UserId>(lists.size()); ++u) {
    double score = 1.0;
    for (ItemId i : lists[u]) {
      per_user[u].push_back({i, score});
      score /= 2;
    }
  }
  return make_run_table(tag, sd, per_user);
}

ExposureVector make_exposure(std::vector<std::int64_t> counts, int k, int m) {
  ExposureVector ev;
  ev.counts = std::move(counts);
  ev.k = k;
  ev.m = m;
  return ev;
}

// Literal transcriptions of the six relevance definitions, written
// independently of the library path (sets and explicit rank loops).
double naive_rel(Measure m, const std::vector<ItemId>& list, int k,
                 const std::set<ItemId>& rel) {
  int limit = std::min<int>(k, static_cast<int>(list.size()));
  std::vector<int> is_rel(limit);
  for (int r = 0; r < limit; ++r) {
    is_rel[r] = rel.count(list[r]) ? 1 : 0;
  }
  int hits = 0;
  for (int r = 0; r < limit; ++r) {
    hits += is_rel[r];
  }
  switch (m) {
    case Measure::HR:
      return hits > 0 ? 1.0 : 0.0;
    case Measure::MRR:
      for (int r = 0; r < limit; ++r) {
        if (is_rel[r]) {
          return 1.0 / (r + 1.0);
        }
      }
      return 0.0;
    case Measure::P:
      return hits / static_cast<double>(k);
    case Measure::R:
      return hits / static_cast<double>(rel.size());
    case Measure::MAP: {
      double ap = 0;
      int seen = 0;
      for (int r = 0; r < limit; ++r) {
        if (is_rel[r]) {
          ++seen;
          ap += seen / (r + 1.0);
        }
      }
      return ap / std::min<double>(rel.size(), k);
    }
    case Measure::NDCG: {
      double dcg = 0, idcg = 0;
      for (int r = 0; r < limit; ++r) {
        if (is_rel[r]) {
          dcg += 1.0 / std::log2(r + 2.0);
        }
      }
      for (int r = 0; r < std::min<int>(k, static_cast<int>(rel.size())); ++r) {
        idcg += 1.0 / std::log2(r + 2.0);
      }
      return dcg / idcg;
    }
    default:
      return 0;
  }
}

}  // namespace

TEST_SUITE_BEGIN("measures");

TEST_CASE("a perfect list scores 1 on every relevance measure") {
  auto sd = bare_split(1, 12, {{3, 4, 5}});
  auto rt = table_from_lists(sd, {{3, 4, 5}});
  for (Measure m : rel_measures()) {
    CHECK(rel_score(m, rt, sd, 3) == doctest::Approx(1.0).epsilon(kTol));
  }
}

TEST_CASE("normalised MAP and NDCG reach 1 with fewer relevants than k") {
  auto sd = bare_split(1, 20, {{3, 4, 5}});
  auto rt = table_from_lists(sd, {{3, 4, 5, 6, 7, 8, 9, 10, 11, 12}});
  CHECK(rel_score(Measure::MAP, rt, sd, 10) == doctest::Approx(1.0).epsilon(kTol));
  CHECK(rel_score(Measure::NDCG, rt, sd, 10) == doctest::Approx(1.0).epsilon(kTol));
  CHECK(rel_score(Measure::P, rt, sd, 10) == doctest::Approx(0.3).epsilon(kTol));
  CHECK(rel_score(Measure::R, rt, sd, 10) == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("five-user random instance matches the literal definitions") {
  Rng rng(99);
  int n = 15, k = 4;
  std::vector<std::vector<ItemId>> rel(5), lists(5);
  for (int u = 0; u < 5; ++u) {
    std::set<ItemId> rs;
    std::size_t want = 2 + rng.below(4);
    while (rs.size() < want) {
      rs.insert(static_cast<ItemId>(rng.below(n)));
    }
    rel[u].assign(rs.begin(), rs.end());
    std::set<ItemId> ls;
    while (ls.size() < 6) {
      ls.insert(static_cast<ItemId>(rng.below(n)));
    }
    lists[u].assign(ls.begin(), ls.end());
    rng.shuffle(lists[u]);
  }
  auto sd = bare_split(5, n, rel);
  auto rt = table_from_lists(sd, lists);
  for (Measure m : rel_measures()) {
    double expect = 0;
    for (int u = 0; u < 5; ++u) {
      std::set<ItemId> rs(rel[u].begin(), rel[u].end());
      expect += naive_rel(m, lists[u], k, rs);
    }
    expect /= 5;
    CHECK(rel_score(m, rt, sd, k) == doctest::Approx(expect).epsilon(kTol));
  }
}

TEST_CASE("uniform exposure maxes every fairness measure") {
  auto ev = make_exposure({3, 3, 3, 3, 3}, 3, 5);
  CHECK(fair_score(Measure::Jain, ev) == 1.0);
  CHECK(fair_score(Measure::QF, ev) == 1.0);
  CHECK(fair_score(Measure::Ent, ev) == doctest::Approx(1.0).epsilon(kTol));
  CHECK(fair_score(Measure::FSat, ev) == 1.0);
  CHECK(fair_score(Measure::Gini, ev) == doctest::Approx(0.0).epsilon(kTol));
}

TEST_CASE("single-item exposure is maximally unfair") {
  int n = 8;
  std::vector<std::int64_t> counts(n, 0);
  counts[2] = 24;
  auto ev = make_exposure(counts, 3, 8);
  CHECK(fair_score(Measure::Jain, ev) == doctest::Approx(1.0 / n).epsilon(kTol));
  CHECK(fair_score(Measure::QF, ev) == doctest::Approx(1.0 / n).epsilon(kTol));
  CHECK(fair_score(Measure::Ent, ev) == doctest::Approx(0.0).epsilon(kTol));
  CHECK(fair_score(Measure::Gini, ev) ==
        doctest::Approx((n - 1.0) / n).epsilon(kTol));
}

TEST_CASE("hand-evaluated counts (0,1,2,3)") {
  auto ev = make_exposure({0, 1, 2, 3}, 2, 3);  // k*m = 6, n = 4, floor = 1
  CHECK(fair_score(Measure::FSat, ev) == doctest::Approx(3.0 / 4));
  CHECK(fair_score(Measure::Jain, ev) == doctest::Approx(36.0 / 56).epsilon(kTol));
  CHECK(fair_score(Measure::Gini, ev) == doctest::Approx(10.0 / 24).epsilon(kTol));
  double h = -(1.0 / 6 * std::log(1.0 / 6) + 2.0 / 6 * std::log(2.0 / 6) +
               3.0 / 6 * std::log(3.0 / 6));
  CHECK(fair_score(Measure::Ent, ev) ==
        doctest::Approx(h / std::log(4.0)).epsilon(kTol));
}

TEST_CASE("Jain, Ent and Gini are scale invariant") {
  std::vector<std::int64_t> base{0, 1, 4, 2, 3, 0, 2};
  for (int c : {2, 3, 7}) {
    std::vector<std::int64_t> scaled;
    for (auto v : base) {
      scaled.push_back(v * c);
    }
    auto a = make_exposure(base, 3, 4);
    auto b = make_exposure(scaled, 3, 4);
    for (Measure m : {Measure::Jain, Measure::Ent, Measure::Gini}) {
      CHECK(fair_score(m, a) == doctest::Approx(fair_score(m, b)).epsilon(kTol));
    }
  }
}

TEST_CASE("fairness bounds hold on random exposure vectors") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    int n = 2 + static_cast<int>(rng.below(12));
    std::vector<std::int64_t> counts(n, 0);
    for (int s = 0; s < 40; ++s) {
      ++counts[rng.below(n)];
    }
    auto ev = make_exposure(counts, 4, 10);
    double jain = fair_score(Measure::Jain, ev);
    CHECK(jain >= 1.0 / n - kTol);
    CHECK(jain <= 1.0 + kTol);
    double gini = fair_score(Measure::Gini, ev);
    CHECK(gini >= -kTol);
    CHECK(gini <= (n - 1.0) / n + kTol);
    for (Measure m : {Measure::QF, Measure::Ent, Measure::FSat}) {
      double v = fair_score(m, ev);
      CHECK(v >= -kTol);
      CHECK(v <= 1.0 + kTol);
    }
  }
}

TEST_CASE("entropy needs two items") {
  CHECK_THROWS_AS(fair_score(Measure::Ent, make_exposure({5}, 1, 5)), Error);
}

TEST_CASE("promoting a relevant item never hurts set-based measures") {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    int n = 12, k = 4, len = 8;
    std::vector<ItemId> pool(n);
    for (int i = 0; i < n; ++i) {
      pool[i] = i;
    }
    rng.shuffle(pool);
    std::vector<ItemId> list(pool.begin(), pool.begin() + len);
    std::set<ItemId> rel;
    while (rel.size() < 3) {
      rel.insert(static_cast<ItemId>(rng.below(n)));
    }
    int out = -1, in = -1;
    for (int r = 0; r < k; ++r) {
      if (!rel.count(list[r])) {
        out = r;
      }
    }
    for (int r = k; r < len; ++r) {
      if (rel.count(list[r])) {
        in = r;
      }
    }
    if (out < 0 || in < 0) {
      continue;
    }
    std::vector<ItemId> rel_sorted(rel.begin(), rel.end());
    std::span<const ItemId> topk(list.data(), k);
    double before_p = per_user_rel(Measure::P, topk, rel_sorted);
    double before_r = per_user_rel(Measure::R, topk, rel_sorted);
    double before_h = per_user_rel(Measure::HR, topk, rel_sorted);
    std::swap(list[out], list[in]);
    double after_p = per_user_rel(Measure::P, topk, rel_sorted);
    double after_r = per_user_rel(Measure::R, topk, rel_sorted);
    double after_h = per_user_rel(Measure::HR, topk, rel_sorted);
    CHECK(after_p >= before_p - kTol);
    CHECK(after_r >= before_r - kTol);
    CHECK(after_h >= before_h - kTol);
  }
}

TEST_CASE("macro averages ignore user order; set measures ignore top-k order") {
  auto sd = bare_split(3, 10, {{1, 2}, {3}, {4, 5, 6}});
  auto rt1 = table_from_lists(sd, {{1, 7, 2}, {8, 3, 9}, {4, 6, 5}});
  auto sd2 = bare_split(3, 10, {{4, 5, 6}, {1, 2}, {3}});
  auto rt2 = table_from_lists(sd2, {{5, 4, 6}, {2, 1, 7}, {9, 8, 3}});
  for (Measure m : {Measure::P, Measure::R, Measure::HR}) {
    CHECK(rel_score(m, rt1, sd, 3) ==
          doctest::Approx(rel_score(m, rt2, sd2, 3)).epsilon(kTol));
  }
}

// ---------------------------------------------------------------------------
// Joint measures

namespace {

double weight(int rank1) { return 1.0 / std::log2(rank1 + 1.0); }

struct Dense {
  std::vector<std::vector<double>> eps;       // actual exposure
  std::vector<std::vector<double>> eps_star;  // target exposure
  int m, n, k;
};

Dense dense_exposure(const SplitDataset& sd,
                     const std::vector<std::vector<ItemId>>& lists, int k) {
  Dense d;
  d.m = static_cast<int>(lists.size());
  d.n = sd.num_items();
  d.k = k;
  d.eps.assign(d.m, std::vector<double>(d.n, 0.0));
  d.eps_star.assign(d.m, std::vector<double>(d.n, 0.0));
  for (int u = 0; u < d.m; ++u) {
    for (int r = 0; r < k; ++r) {
      d.eps[u][lists[u][r]] = weight(r + 1);
    }
    int nrel = static_cast<int>(sd.test[u].size());
    double mass_rel = 0, mass_rest = 0;
    for (int r = 1; r <= k; ++r) {
      if (r <= std::min(nrel, k)) {
        mass_rel += weight(r);
      } else {
        mass_rest += weight(r);
      }
    }
    for (int i = 0; i < d.n; ++i) {
      bool is_rel = contains_sorted(sd.test[u], i);
      d.eps_star[u][i] =
          is_rel ? mass_rel / nrel : (d.n > nrel ? mass_rest / (d.n - nrel) : 0);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("attention equal to deserved attention zeroes IAA, II-F and AI-F") {
  // k = 1, one distinct relevant item per user, ranked first
  auto sd = bare_split(4, 6, {{0}, {1}, {2}, {3}});
  auto rt = table_from_lists(sd, {{0}, {1}, {2}, {3}});
  CHECK(joint_score(Measure::IAA, rt, sd, 1) == doctest::Approx(0.0).epsilon(kTol));
  CHECK(joint_score(Measure::IIF, rt, sd, 1) == doctest::Approx(0.0).epsilon(kTol));
  CHECK(joint_score(Measure::AIF, rt, sd, 1) == doctest::Approx(0.0).epsilon(kTol));
}

TEST_CASE("a lone user with their one relevant item on top has no envy") {
  auto sd = bare_split(1, 6, {{2}});
  auto rt = table_from_lists(sd, {{2, 0, 1}});
  CHECK(joint_score(Measure::MME, rt, sd, 3) == doctest::Approx(0.0).epsilon(kTol));
}

TEST_CASE("4-user/6-item instance matches literal joint formulas") {
  int k = 2, n = 6, m = 4;
  std::vector<std::vector<ItemId>> rel = {{0, 2}, {2, 3}, {1}, {0, 4, 5}};
  std::vector<std::vector<ItemId>> lists = {{2, 1}, {3, 0}, {1, 4}, {5, 2}};
  auto sd = bare_split(m, n, rel);
  auto rt = table_from_lists(sd, lists);

  auto d = dense_exposure(sd, lists, k);

  double iif = 0;
  for (int u = 0; u < m; ++u) {
    for (int i = 0; i < n; ++i) {
      double dv = d.eps[u][i] - d.eps_star[u][i];
      iif += dv * dv;
    }
  }
  iif /= m * n;
  double aif = 0;
  for (int i = 0; i < n; ++i) {
    double mean = 0;
    for (int u = 0; u < m; ++u) {
      mean += d.eps[u][i] - d.eps_star[u][i];
    }
    mean /= m;
    aif += mean * mean;
  }
  aif /= n;
  CHECK(joint_score(Measure::IIF, rt, sd, k) == doctest::Approx(iif).epsilon(kTol));
  CHECK(joint_score(Measure::AIF, rt, sd, k) == doctest::Approx(aif).epsilon(kTol));

  std::vector<double> att(n, 0), merit(n, 0);
  for (int u = 0; u < m; ++u) {
    for (int r = 0; r < k; ++r) {
      att[lists[u][r]] += weight(r + 1);
    }
    for (ItemId i : rel[u]) {
      merit[i] += 1;
    }
  }
  double asum = 0, msum = 0;
  for (int i = 0; i < n; ++i) {
    asum += att[i];
    msum += merit[i];
  }
  double iaa = 0;
  for (int i = 0; i < n; ++i) {
    iaa += std::abs(att[i] / asum - merit[i] / msum);
  }
  iaa /= 2;
  CHECK(joint_score(Measure::IAA, rt, sd, k) == doctest::Approx(iaa).epsilon(kTol));

  double wk = weight(1) + weight(2);
  int better = 0;
  for (int i = 0; i < n; ++i) {
    double impact = 0;
    for (int u = 0; u < m; ++u) {
      for (int r = 0; r < k; ++r) {
        if (lists[u][r] == i && contains_sorted(sd.test[u], i)) {
          impact += weight(r + 1);
        }
      }
    }
    if (impact > merit[i] * wk / n) {
      ++better;
    }
  }
  CHECK(joint_score(Measure::IBO, rt, sd, k) ==
        doctest::Approx(better / static_cast<double>(n)).epsilon(kTol));

  auto util = [&](int i, int j) {
    double v = 0;
    for (int u = 0; u < m; ++u) {
      if (!contains_sorted(sd.test[u], i)) {
        continue;
      }
      for (int r = 0; r < k; ++r) {
        if (lists[u][r] == j) {
          v += weight(r + 1);
        }
      }
    }
    return v / m;
  };
  double mme = 0;
  for (int i = 0; i < n; ++i) {
    double own = util(i, i), best = 0;
    for (int j = 0; j < n; ++j) {
      best = std::max(best, util(i, j));
    }
    mme += std::max(0.0, best - own);
  }
  mme /= n;
  CHECK(joint_score(Measure::MME, rt, sd, k) == doctest::Approx(mme).epsilon(kTol));
  CHECK(mme > 0);  // instance chosen to exhibit envy
}

TEST_CASE("measure directions follow the published conventions") {
  for (Measure m : {Measure::Gini, Measure::MME, Measure::IAA, Measure::IIF,
                    Measure::AIF}) {
    CHECK_FALSE(higher_better(m));
  }
  for (Measure m : {Measure::HR, Measure::MRR, Measure::P, Measure::R,
                    Measure::MAP, Measure::NDCG, Measure::Jain, Measure::QF,
                    Measure::Ent, Measure::FSat, Measure::IBO}) {
    CHECK(higher_better(m));
  }
  CHECK(parse_measure("II-F") == Measure::IIF);
  CHECK(std::string(measure_name(Measure::AIF)) == "AI-F");
}

TEST_SUITE_END();

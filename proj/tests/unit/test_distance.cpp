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

#include "dpfr/distance.hpp"

using namespace dpfr;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Circular arc of radius 0.8 centred at (0.2, 0.2), from (1, 0.2) up to
// (0.2, 1), sampled as a descending-relevance frontier.
ParetoFrontier quarter_circle(int samples) {
  std::vector<ScorePoint> pts;
  for (int s = 0; s < samples; ++s) {
    double theta = (kPi / 2) * s / (samples - 1);
    pts.push_back({0.2 + 0.8 * std::cos(theta), 0.2 + 0.8 * std::sin(theta),
                   std::to_string(s)});
  }
  return build_frontier(pts, Measure::NDCG, Measure::Jain);
}

ParetoFrontier from_points(std::vector<ScorePoint> pts) {
  return build_frontier(pts, Measure::NDCG, Measure::Jain);
}

}  // namespace

TEST_SUITE_BEGIN("distance");

TEST_CASE("polyline length of a diagonal") {
  CHECK(len_pf({{1, 0, ""}, {0, 1, ""}}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("collinear interior points do not change the length") {
  CHECK(len_pf({{1, 0, ""}, {0.5, 0.5, ""}, {0, 1, ""}}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("a single point has zero length") {
  CHECK(len_pf({{0.4, 0.4, ""}}) == 0.0);
}

TEST_CASE("dense quarter circle length approaches the arc length") {
  auto pf = quarter_circle(1000);
  CHECK(len_pf(pf) == doctest::Approx(0.8 * kPi / 2).epsilon(1e-3 / 1.256));
}

TEST_CASE("alpha endpoints select the first and last point") {
  auto pf = from_points({{0.9, 0.1, "a"}, {0.6, 0.5, "b"}, {0.2, 0.8, "c"}});
  CHECK(reference_point(pf, 0.0).point.rel == 0.9);
  CHECK(reference_point(pf, 1.0).point.rel == 0.2);
  CHECK(reference_point(pf, 1.0).index == 2);
}

TEST_CASE("midpoint of the drawn arc lands near (0.766, 0.766)") {
  auto pf = quarter_circle(1200);
  auto ref = reference_point(pf, 0.5);
  CHECK(std::abs(ref.point.rel - 0.766) < 0.005);
  CHECK(std::abs(ref.point.fair - 0.766) < 0.005);
}

TEST_CASE("reference point follows arc length, not index percentile") {
  // many points crowded at the relevance end, a long tail to the fair end
  std::vector<ScorePoint> pts;
  for (int s = 0; s < 50; ++s) {
    pts.push_back({1.0 - 0.001 * s, 0.1 + 0.001 * s, ""});
  }
  pts.push_back({0.2, 0.9, "far"});
  auto pf = from_points(pts);
  auto ref = reference_point(pf, 0.5);
  // exhaustive scan over candidate indices
  double total = len_pf(pf);
  double cum = 0, best_err = std::abs(0 - 0.5 * total);
  std::size_t best = 0;
  for (std::size_t j = 1; j + 1 < pf.points.size(); ++j) {
    cum += point_distance(pf.points[j - 1], pf.points[j]);
    double err = std::abs(cum - 0.5 * total);
    if (err < best_err) {
      best_err = err;
      best = j;
    }
  }
  CHECK(ref.index == best);
  // the halfway-by-count point sits inside the crowded head, far from the
  // halfway-by-length point
  CHECK(ref.index != pf.points.size() / 2);
}

TEST_CASE("unfit frontiers are rejected") {
  auto pf = from_points({{0.9, 0.4, ""}, {0.5, 0.4, ""}});
  CHECK_FALSE(pf.fit);
  CHECK_THROWS_WITH_AS(reference_point(pf, 0.5), doctest::Contains("unfit"),
                       Error);
}

TEST_CASE("alpha outside the unit interval is rejected") {
  auto pf = quarter_circle(50);
  CHECK_THROWS_AS(reference_point(pf, -0.1), Error);
  CHECK_THROWS_AS(reference_point(pf, 1.1), Error);
}

TEST_CASE("distances of the three example runs to the arc midpoint") {
  auto pf = quarter_circle(1200);
  auto ref = reference_point(pf, 0.5);
  auto d = [&](double r, double f) {
    return dpfr_score({r, f, ""}, ref, pf).value;
  };
  CHECK(std::abs(d(0.2, 0.9) - 0.582) < 0.002);
  CHECK(std::abs(d(0.65, 0.2) - 0.578) < 0.002);
  CHECK(std::abs(d(0.5, 0.5) - 0.376) < 0.002);
  CHECK(d(ref.point.rel, ref.point.fair) == 0.0);
}

TEST_CASE("distance is a metric: symmetry and triangle inequality") {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    ScorePoint a{rng.unit(), rng.unit(), ""};
    ScorePoint b{rng.unit(), rng.unit(), ""};
    ScorePoint c{rng.unit(), rng.unit(), ""};
    CHECK(point_distance(a, b) == doctest::Approx(point_distance(b, a)));
    CHECK(point_distance(a, c) <=
          point_distance(a, b) + point_distance(b, c) + 1e-12);
  }
}

TEST_CASE("alpha sweep moves the reference from relevance toward fairness") {
  auto pf = quarter_circle(400);
  double prev_rel = 2.0, prev_fair = -1.0;
  for (double alpha : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
    auto ref = reference_point(pf, alpha);
    CHECK(ref.point.rel <= prev_rel + 1e-12);
    CHECK(ref.point.fair >= prev_fair - 1e-12);
    prev_rel = ref.point.rel;
    prev_fair = ref.point.fair;
  }
}

TEST_CASE("reference point is deterministic and idempotent") {
  auto pf = quarter_circle(333);
  auto a = reference_point(pf, 0.37);
  auto b = reference_point(pf, 0.37);
  CHECK(a.index == b.index);
  CHECK(a.point.rel == b.point.rel);
}

TEST_CASE("midpoint error of an identical estimate is zero") {
  auto pf = quarter_circle(500);
  CHECK(midpoint_error(pf, pf, 0.5) == 0.0);
}

TEST_CASE("skipping every other point keeps the midpoint close") {
  auto full = quarter_circle(1001);
  std::vector<ScorePoint> half;
  for (std::size_t s = 0; s < full.points.size(); s += 2) {
    half.push_back(full.points[s]);
  }
  auto est = build_frontier(half, Measure::NDCG, Measure::Jain);
  double max_seg = 0;
  for (std::size_t s = 1; s < full.points.size(); ++s) {
    max_seg = std::max(max_seg,
                       point_distance(full.points[s - 1], full.points[s]));
  }
  CHECK(midpoint_error(full, est, 0.5) <= 2 * max_seg + 1e-12);
}

TEST_CASE("a three-point estimate of a dense frontier stays reasonable") {
  auto full = quarter_circle(1000);
  std::vector<ScorePoint> coarse{full.points.front(),
                                 full.points[full.points.size() / 2],
                                 full.points.back()};
  auto est = build_frontier(coarse, Measure::NDCG, Measure::Jain);
  double err = midpoint_error(full, est, 0.5);
  CHECK(err < 0.05);
}

TEST_SUITE_END();

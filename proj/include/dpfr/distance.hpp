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

#include "dpfr/pareto.hpp"

namespace dpfr {

enum class DistanceMetric { Euclidean };

inline double point_distance(const ScorePoint& a, const ScorePoint& b,
                             DistanceMetric metric = DistanceMetric::Euclidean) {
  switch (metric) {
    case DistanceMetric::Euclidean: {
      double dr = a.rel - b.rel;
      double df = a.fair - b.fair;
      return std::sqrt(dr * dr + df * df);
    }
  }
  return 0.0;
}

// Polyline length of the frontier in descending-rel order.
inline double len_pf(const std::vector<ScorePoint>& points) {
  double len = 0.0;
  for (std::size_t t = 1; t < points.size(); ++t) {
    len += point_distance(points[t - 1], points[t]);
  }
  return len;
}

inline double len_pf(const ParetoFrontier& pf) { return len_pf(pf.points); }

struct ReferencePoint {
  ScorePoint point;
  double alpha = 0.5;
  std::size_t index = 0;  // position in the frontier, 0 = max relevance
};

// The frontier point whose cumulative traversal length from the max-relevance
// end is closest to alpha times the total length. Candidates stop one short
// of the final point, matching how the traversal is defined; alpha = 1
// additionally admits the final point so the fairest end is reachable. Ties
// resolve toward the relevance end.
inline ReferencePoint reference_point(const ParetoFrontier& pf, double alpha) {
  if (!pf.fit) {
    throw Error("measure pair " + std::string(measure_name(pf.rel_measure)) +
                "-" + measure_name(pf.fair_measure) +
                " is unfit for distance evaluation (zero or undefined "
                "gradient)");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw Error("alpha must lie in [0, 1]");
  }
  const auto& pts = pf.points;
  double total = len_pf(pts);
  std::size_t candidates = pts.size() - 1;  // indices [0, |P|-2]
  if (alpha == 1.0) {
    candidates = pts.size();
  }
  double best_err = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  double cum = 0.0;
  for (std::size_t j = 0; j < candidates; ++j) {
    if (j > 0) {
      cum += point_distance(pts[j - 1], pts[j]);
    }
    double err = std::abs(cum - alpha * total);
    if (err < best_err) {
      best_err = err;
      best = j;
    }
  }
  ReferencePoint rp;
  rp.point = pts[best];
  rp.alpha = alpha;
  rp.index = best;
  return rp;
}

struct DpfrScore {
  double value = 0.0;
  Measure rel_measure;
  Measure fair_measure;
  std::string run_tag;
};

// Distance of a run's (rel, fair) point to the reference point. Lower is
// better; values above 1 are possible and are not normalised. Distances are
// taken in the raw score space, so pairs with a lower-better fairness measure
// need no flipping.
inline DpfrScore dpfr_score(const ScorePoint& run_point,
                            const ReferencePoint& ref,
                            const ParetoFrontier& pf,
                            DistanceMetric metric = DistanceMetric::Euclidean) {
  DpfrScore s;
  s.value = point_distance(run_point, ref.point, metric);
  s.rel_measure = pf.rel_measure;
  s.fair_measure = pf.fair_measure;
  s.run_tag = run_point.tag;
  return s;
}

// Shift of the alpha reference point when the frontier is estimated from a
// subset of checkpoints.
inline double midpoint_error(const ParetoFrontier& full,
                             const ParetoFrontier& est, double alpha) {
  return point_distance(reference_point(full, alpha).point,
                        reference_point(est, alpha).point);
}

}  // namespace dpfr

#pragma once

// Covering-number estimation on sampled point clouds: greedy farthest-point
// covers (upper estimates), greedy separated subsets (lower bounds), and
// entropy-regularity profiles comparing log-covering numbers against
// kappa * n^2 ln^2(n) / t^2 over a radius grid.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "slicelab/body.hpp"
#include "slicelab/common.hpp"
#include "slicelab/sampling.hpp"

namespace slicelab {

// Farthest-point traversal of a sample.  The center sequence is independent
// of the target radius, so one trace answers every radius query: with the
// first k+1 centers the whole sample lies within radii[k] of the center set,
// and radii[] is nonincreasing.  The first center is the sample point nearest
// the origin (bodies in this lab are centered), which makes the trace
// equivariant under scaling and gives a one-ball cover for radii beyond the
// sampled circumradius.
struct GreedyCoverTrace {
  std::vector<std::int64_t> center_order;  // indices into the sample
  std::vector<double> radii;               // radii[k]: max dist with k+1 centers
  bool complete = false;                   // every sample point became a center
  double sample_radius = 0.0;              // max norm over the sample

  // Number of radius-t balls the greedy cover uses.
  std::int64_t size_at(double t) const {
    require(t > 0.0, "cover size: radius must be positive");
    // radii is nonincreasing; find the first entry <= t.
    auto it = std::partition_point(radii.begin(), radii.end(),
                                   [t](double r) { return r > t; });
    if (it == radii.end()) {
      if (complete) return std::int64_t(radii.size());
      throw GeometryError(
          "cover size: trace stopped above radius " + format_double(t) +
          "; rebuild the trace with a smaller stop radius");
    }
    return std::int64_t(it - radii.begin()) + 1;
  }
};

// Run the farthest-point traversal until the covering radius drops to
// stop_radius (or every point is a center).  Ties in the farthest-point
// selection break toward the smallest index, so the trace is deterministic
// and exactly scale-equivariant for power-of-two scalings.
inline GreedyCoverTrace greedy_cover_trace(const PointSample& sample,
                                           double stop_radius) {
  const std::int64_t n_pts = sample.count();
  require(n_pts >= 1, "greedy cover: empty sample");
  require(stop_radius >= 0.0, "greedy cover: stop radius must be >= 0");

  GreedyCoverTrace trace;
  Vec norms = sample.points.rowwise().norm();
  trace.sample_radius = norms.maxCoeff();

  std::int64_t first = 0;
  norms.minCoeff(&first);
  trace.center_order.push_back(first);

  // dist2[i]: squared distance from point i to its nearest chosen center.
  Vec dist2 =
      (sample.points.rowwise() - sample.points.row(trace.center_order[0]))
          .rowwise()
          .squaredNorm();
  const double stop2 = stop_radius * stop_radius;
  while (true) {
    std::int64_t far_idx = 0;
    double far2 = dist2.maxCoeff(&far_idx);
    trace.radii.push_back(std::sqrt(far2));
    if (far2 <= stop2 || std::int64_t(trace.center_order.size()) == n_pts) {
      trace.complete = (far2 <= 0.0) ||
                       (std::int64_t(trace.center_order.size()) == n_pts);
      break;
    }
    trace.center_order.push_back(far_idx);
    Vec d2 = (sample.points.rowwise() - sample.points.row(far_idx))
                 .rowwise()
                 .squaredNorm();
    dist2 = dist2.cwiseMin(d2);
  }
  return trace;
}

// Size of a greedy farthest-point cover of the sample by radius-t balls
// centered at sample points.  Upper estimate of the center-restricted
// covering number of the sampled set; the continuum covering number is
// approached only as the sample grows dense.
inline std::int64_t covering_upper(const Body& body, double t,
                                   const PointSample& sample) {
  require(t > 0.0, "covering_upper: radius must be positive");
  require(sample.dim() == body.dim(), "covering_upper: dimension mismatch");
  return greedy_cover_trace(sample, t).size_at(t);
}

// Size of a greedily built subset of the sample with pairwise distances
// strictly above 2t.  Any radius-t ball contains at most one such point, so
// this lower-bounds every center-restricted cover of the sample, including
// the greedy one.
inline std::int64_t packing_lower(const Body& body, double t,
                                  const PointSample& sample) {
  require(t > 0.0, "packing_lower: radius must be positive");
  require(sample.dim() == body.dim(), "packing_lower: dimension mismatch");
  require(sample.count() >= 1, "packing_lower: empty sample");
  const double sep2 = 4.0 * t * t;
  std::vector<std::int64_t> kept;
  kept.push_back(0);
  for (std::int64_t i = 1; i < sample.count(); ++i) {
    bool separated = true;
    for (std::int64_t j : kept) {
      double d2 = (sample.points.row(i) - sample.points.row(j)).squaredNorm();
      if (d2 <= sep2) {
        separated = false;
        break;
      }
    }
    if (separated) kept.push_back(i);
  }
  return std::int64_t(kept.size());
}

// Default radius grid: 16 geometric points from 0.05 R to 1.2 R.
inline std::vector<double> default_t_grid(double radius, int points = 16) {
  require(radius > 0.0, "default_t_grid: radius must be positive");
  require(points >= 2, "default_t_grid: need at least two grid points");
  std::vector<double> grid(points);
  const double lo = 0.05 * radius, hi = 1.2 * radius;
  for (int i = 0; i < points; ++i)
    grid[i] = lo * std::pow(hi / lo, double(i) / double(points - 1));
  return grid;
}

struct CoveringProfile {
  std::string body_id;
  int dim = 0;
  double kappa = 0.0;  // constant in the entropy bound kappa n^2 ln^2 n / t^2
  double tau = 0.0;    // admissibility threshold t >= tau sqrt(n ln n)
  std::vector<double> t_grid;
  std::vector<std::int64_t> upper;       // greedy cover sizes
  std::vector<std::int64_t> lower;       // separated-subset sizes
  std::vector<double> regularity_rhs;    // kappa n^2 ln^2 n / t^2
  std::vector<char> admissible;          // t above the threshold?
  bool range_empty = false;   // no grid point is admissible
  bool regular = false;       // ln(upper) <= rhs on every admissible t
  double kappa_fit = 0.0;     // least-squares kappa through the origin
  double sample_radius = 0.0;
  std::int64_t sample_size = 0;
  std::uint64_t seed = 0;
  std::string caveat;

  std::string to_csv() const {
    std::string out = "t,lower,upper,rhs,verdict\n";
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      bool ok = !admissible[i] ||
                std::log(double(upper[i])) <= regularity_rhs[i];
      out += format_double(t_grid[i]) + "," + std::to_string(lower[i]) + "," +
             std::to_string(upper[i]) + "," + format_double(regularity_rhs[i]) +
             "," + (!admissible[i] ? "inadmissible" : (ok ? "ok" : "exceeds")) +
             "\n";
    }
    return out;
  }
};

// Profile the entropy-regularity condition on a radius grid: compare the
// log of the greedy cover size against kappa n^2 ln^2(n) / t^2 for every
// admissible t (those at or above tau sqrt(n ln n)), and fit the
// least-squares constant that the measured covers actually support.
inline CoveringProfile regularity_profile(const Body& body, double kappa,
                                          double tau,
                                          const std::vector<double>& t_grid,
                                          const PointSample& sample) {
  require(kappa > 0.0 && tau > 0.0,
          "regularity_profile: kappa and tau must be positive");
  require(!t_grid.empty(), "regularity_profile: empty radius grid");
  require(sample.count() >= 10000,
          "regularity_profile: sample too sparse for a covering estimate "
          "(need >= 10^4 points)");
  require(sample.dim() == body.dim(), "regularity_profile: dimension mismatch");
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
    require(t_grid[i] < t_grid[i + 1],
            "regularity_profile: radius grid must be strictly increasing");
  require(t_grid.front() > 0.0, "regularity_profile: radii must be positive");

  CoveringProfile prof;
  prof.body_id = body.label();
  prof.dim = body.dim();
  prof.kappa = kappa;
  prof.tau = tau;
  prof.t_grid = t_grid;
  prof.sample_size = sample.count();
  prof.seed = sample.seed;
  prof.caveat =
      "covering computed on a sampled point cloud with centers restricted to "
      "sample points; continuum covering numbers are approached only in the "
      "dense-sample limit";

  GreedyCoverTrace trace = greedy_cover_trace(sample, t_grid.front());
  prof.sample_radius = trace.sample_radius;

  const double n = double(body.dim());
  const double ln_n = std::log(n);
  const double numer = kappa * n * n * ln_n * ln_n;
  const double threshold = tau * std::sqrt(n * ln_n);

  bool all_ok = true;
  double sum_ab = 0.0, sum_aa = 0.0;
  for (double t : t_grid) {
    std::int64_t up = trace.size_at(t);
    std::int64_t low = packing_lower(body, t, sample);
    prof.upper.push_back(up);
    prof.lower.push_back(low);
    prof.regularity_rhs.push_back(numer / (t * t));
    bool adm = t >= threshold;
    prof.admissible.push_back(adm ? 1 : 0);
    if (adm) {
      double a = n * n * ln_n * ln_n / (t * t);
      double b = std::log(double(up));
      sum_ab += a * b;
      sum_aa += a * a;
      if (b > numer / (t * t)) all_ok = false;
    }
  }
  prof.range_empty =
      std::none_of(prof.admissible.begin(), prof.admissible.end(),
                   [](char c) { return c != 0; });
  prof.regular = !prof.range_empty && all_ok;
  prof.kappa_fit = (sum_aa > 0.0) ? sum_ab / sum_aa : 0.0;
  return prof;
}

// Convenience overload: draw the sample and build the default radius grid
// from the sampled circumradius.
inline CoveringProfile regularity_profile(const Body& body, double kappa,
                                          double tau, std::int64_t budget,
                                          std::uint64_t seed) {
  PointSample s = sample_uniform(body, budget, substream(seed, "covering"));
  double radius = s.points.rowwise().norm().maxCoeff();
  return regularity_profile(body, kappa, tau, default_t_grid(radius), s);
}

}  // namespace slicelab

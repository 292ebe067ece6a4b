#pragma once

// Scalar moment functionals on bodies: gauge moments I_q(K, C), radial
// moments, the nested double-average slicing functional, and the derived
// width/radius indices k*(C) and q*(K).

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "slicelab/body.hpp"
#include "slicelab/centroid.hpp"
#include "slicelab/estimate.hpp"
#include "slicelab/sampling.hpp"

namespace slicelab {

struct MomentResult {
  Estimate est;
  // Kish effective sample size of the implicit importance weights gauge^q;
  // small values flag an unreliable negative-order moment.
  double effective_sample_size = 0.0;
};

// I_q(sample, C) = ( mean ||x||_C^q )^{1/q}, q in (-n, inf) \ {0}.
// Computed in log space so strongly negative orders stay finite.
inline MomentResult iq_norm_moment(const PointSample& sample, const Body& c,
                                   double q) {
  const int n = sample.dim();
  require(c.dim() == n, "iq_norm_moment: dimension mismatch");
  require(q != 0.0, "iq_norm_moment: order must be nonzero");
  require(q > -double(n),
          "iq_norm_moment: order must exceed -n for a finite moment");
  Eigen::ArrayXd g(sample.count());
  for (std::int64_t i = 0; i < sample.count(); ++i) {
    double v = c.gauge(sample.point(i));
    g[i] = std::max(v, 1e-300);
  }
  MomentResult out;
  out.est = detail::power_mean_log_space(g, q, sample.seed);
  out.effective_sample_size = detail::effective_sample_size(g, q);
  if (q < 0.0 && out.effective_sample_size < 16.0)
    throw InsufficientBudgetError(
        "iq_norm_moment: effective sample size " +
        format_double(out.effective_sample_size, 4) +
        " too small for order " + format_double(q, 4));
  return out;
}

inline MomentResult iq_norm_moment(const Body& k, const Body& c, double q,
                                   std::int64_t budget, std::uint64_t seed) {
  return iq_norm_moment(sample_uniform(k, budget, substream(seed, "iq")), c,
                        q);
}

// Radial moment ( mean |x|^q )^{1/q}: the gauge body is the unit ball.
inline MomentResult radial_moment(const PointSample& sample, double q) {
  require(q != 0.0 && q > -double(sample.dim()),
          "radial_moment: order must lie in (-n, inf) \\ {0}");
  Eigen::ArrayXd g(sample.count());
  for (std::int64_t i = 0; i < sample.count(); ++i)
    g[i] = std::max(sample.point(i).norm(), 1e-300);
  MomentResult out;
  out.est = detail::power_mean_log_space(g, q, sample.seed);
  out.effective_sample_size = detail::effective_sample_size(g, q);
  return out;
}

struct NestedBudget {
  std::int64_t outer = 10000;  // points of the outer body per replication
  std::int64_t inner = 10000;  // points of the inner body per replication
  int replications = 8;
};

namespace detail {

// mean_i ( mean_j |<x_i, y_j>|^q )^{1/q} over the rows of two point clouds,
// computed in GEMM panels with a reused buffer.
inline double nested_mean(const Mat& xs, const Mat& ys, double q) {
  require(xs.cols() == ys.cols(), "nested_mean: dimension mismatch");
  require(xs.rows() > 0 && ys.rows() > 0, "nested_mean: empty cloud");
  const double inv_q = 1.0 / q;
  double acc = 0.0;
  const std::int64_t block = 256;
  Mat panel(std::min<std::int64_t>(block, xs.rows()), ys.rows());
  Eigen::ArrayXd row(ys.rows());
  for (std::int64_t i0 = 0; i0 < xs.rows(); i0 += block) {
    std::int64_t rows = std::min<std::int64_t>(block, xs.rows() - i0);
    panel.topRows(rows).noalias() =
        xs.middleRows(i0, rows) * ys.transpose();
    for (std::int64_t i = 0; i < rows; ++i) {
      row = panel.row(i).array();
      acc += std::pow(abs_pow(row, q).mean(), inv_q);
    }
  }
  return acc / double(xs.rows());
}

}  // namespace detail

// Nested double average
//   I(K, M; q) = mean_{x in K} ( mean_{y in M} |<x, y>|^q )^{1/q},
// i.e. the average over K of the q-th moment gauge generated by M.  Each
// replication redraws both clouds from its own substream; the reported
// standard error is the spread across replications.
inline Estimate slicing_parameter(const Body& k, const Body& m, double q,
                                  const NestedBudget& budget,
                                  std::uint64_t seed) {
  require(k.dim() == m.dim(), "slicing_parameter: dimension mismatch");
  require(q >= 1.0, "slicing_parameter: q must be >= 1");
  require(budget.replications >= 2,
          "slicing_parameter: need at least two replications");
  std::vector<double> reps;
  reps.reserve(std::size_t(budget.replications));
  for (int r = 0; r < budget.replications; ++r) {
    PointSample xs = sample_uniform(
        k, budget.outer, substream(seed, "slicing-outer", std::uint64_t(r)));
    PointSample ys = sample_uniform(
        m, budget.inner, substream(seed, "slicing-inner", std::uint64_t(r)));
    reps.push_back(detail::nested_mean(xs.points, ys.points, q));
  }
  return estimate_from_replicates(reps, seed);
}

struct KstarReport {
  int k = 0;
  Estimate width;   // mean support over random directions
  Estimate radius;  // max support (grid + great-circle refinement)
};

// k*(C) ~ n (w(C)/R(C))^2 from a support-function oracle, clamped to [1, n].
inline KstarReport kstar_index(
    int n, const std::function<Estimate(const Vec&)>& support, int directions,
    std::uint64_t seed) {
  require(directions > 1, "kstar_index: need at least two directions");
  DirectionSet dirs = sample_sphere(n, directions, substream(seed, "kstar"));
  std::vector<double> vals(std::size_t(dirs.count()));
  Vec best;
  double best_val = -1.0;
  for (std::int64_t i = 0; i < dirs.count(); ++i) {
    Vec d = dirs.direction(i);
    Estimate h = support(d);
    vals[std::size_t(i)] = h.value;
    if (h.value > best_val) {
      best_val = h.value;
      best = d;
    }
  }
  // Refine the radius along random great circles through the incumbent.
  RngStream rng(seed, hash_tag("kstar-refine"));
  for (int c = 0; c < 5; ++c) {
    Vec u = rng.gaussian_vec(n);
    u -= best * best.dot(u);
    double un = u.norm();
    if (un < 1e-12) continue;
    u /= un;
    Vec anchor = best;
    auto f = [&](double t) {
      Vec theta = std::cos(t) * anchor + std::sin(t) * u;
      return support(theta).value;
    };
    auto [t, v] = detail::golden_max(f, -0.6, 0.6, 10);
    if (v > best_val) {
      best_val = v;
      best = (std::cos(t) * anchor + std::sin(t) * u).normalized();
    }
  }
  KstarReport rep;
  rep.width = estimate_from_replicates(vals, seed);
  rep.radius = support(best);
  double ratio = rep.width.value / rep.radius.value;
  rep.k = std::clamp(int(std::lround(double(n) * ratio * ratio)), 1, n);
  return rep;
}

inline KstarReport kstar_index(const ZqEvaluator& ev, int directions,
                               std::uint64_t seed) {
  return kstar_index(
      ev.body().dim(), [&](const Vec& d) { return ev.support(d); },
      directions, seed);
}

struct QstarReport {
  double q_star = 1.0;
  // (q, k*(moment body at q)) pairs in scan order.
  std::vector<std::pair<double, int>> scan;
};

// q*(K) = largest q on a geometric grid in [1, n] with k* of the q-th moment
// body still >= q.  All grid points share one sample of K.
inline QstarReport qstar_index(const Body& k, std::int64_t budget,
                               int directions, std::uint64_t seed,
                               double grid_factor = 1.5) {
  const int n = k.dim();
  require(grid_factor > 1.0, "qstar_index: grid factor must exceed 1");
  PointSample sample = sample_uniform(k, budget, substream(seed, "qstar"));
  std::vector<double> grid;
  for (double q = 1.0; q < double(n); q *= grid_factor) grid.push_back(q);
  if (grid.empty() || grid.back() < double(n)) grid.push_back(double(n));
  QstarReport rep;
  for (double q : grid) {
    ZqEvaluator ev(k, q, sample);
    KstarReport ks = kstar_index(ev, directions, substream(seed, "qstar-k"));
    rep.scan.emplace_back(q, ks.k);
    if (double(ks.k) >= q) rep.q_star = q;
  }
  return rep;
}

}  // namespace slicelab

#pragma once

// Moment-body calculus: the q-th moment support function
//   h_q(y) = ( mean_{x in K} |<x, y>|^q )^{1/q},  q >= 1,
// its polar gauge (the same number read as a norm of y), radii, widths and
// inclusion ratios between different q.  One evaluator owns one point sample
// and reuses it for every direction and derived quantity, so comparisons
// between directions or between exponents ride on common random numbers.

#include <cstdint>
#include <map>
#include <vector>

#include "slicelab/body.hpp"
#include "slicelab/estimate.hpp"
#include "slicelab/sampling.hpp"

namespace slicelab {

namespace detail {

// |g|^q elementwise with fast paths for the small integer exponents the
// default grids use.
inline Eigen::ArrayXd abs_pow(const Eigen::ArrayXd& g, double q) {
  Eigen::ArrayXd a = g.abs();
  if (q == 1.0) return a;
  if (q == 2.0) return a.square();
  if (q == 4.0) return a.square().square();
  if (q == 8.0) return a.square().square().square();
  double qi;
  if (std::modf(q, &qi) == 0.0 && q > 0.0 && q <= 64.0) {
    // Exponentiation by squaring on the whole array.
    Eigen::ArrayXd acc = Eigen::ArrayXd::Ones(a.size());
    Eigen::ArrayXd base = a;
    auto e = static_cast<unsigned>(qi);
    while (e > 0) {
      if (e & 1u) acc *= base;
      e >>= 1u;
      if (e) base = base.square();
    }
    return acc;
  }
  return a.pow(q);
}

// (mean v^r)^{1/r} for positive values, computed in log space, with a
// delta-method standard error.  Handles negative and large r.
inline Estimate power_mean_log_space(const Eigen::ArrayXd& values, double r,
                                     std::uint64_t seed = 0) {
  require(r != 0.0, "power_mean: exponent must be nonzero");
  const auto n = values.size();
  require(n > 1, "power_mean: need at least two values");
  require((values > 0.0).all(),
          "power_mean: values must be strictly positive");
  Eigen::ArrayXd a = r * values.log();
  double m = a.maxCoeff();
  Eigen::ArrayXd w = (a - m).exp();
  double mean_w = w.mean();
  double sd_w = std::sqrt((w - mean_w).square().sum() / double(n - 1));
  Estimate out;
  out.value = std::exp((m + std::log(mean_w)) / r);
  out.std_error = out.value * (sd_w / (std::sqrt(double(n)) * mean_w)) /
                  std::abs(r);
  out.sample_count = n;
  out.seed = seed;
  return out;
}

// Kish effective sample size of the implicit weights v^r.
inline double effective_sample_size(const Eigen::ArrayXd& values, double r) {
  Eigen::ArrayXd a = r * values.log();
  double m = a.maxCoeff();
  Eigen::ArrayXd w = (a - m).exp();
  double s1 = w.sum(), s2 = w.square().sum();
  return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

}  // namespace detail

// h_q(y) from an existing sample of K.  Positively homogeneous in y.
inline Estimate zq_support_from_sample(const PointSample& sample, double q,
                                       const Vec& y) {
  require(q >= 1.0, "zq_support: q must be >= 1");
  require(y.size() == sample.dim(), "zq_support: dimension mismatch");
  double ny = y.norm();
  if (ny == 0.0) return Estimate{0.0, 0.0, sample.count(), sample.seed};
  Vec u = y / ny;
  Eigen::ArrayXd g = (sample.points * u).array();
  Estimate est;
  if (q <= 100.0) {
    Eigen::ArrayXd p = detail::abs_pow(g, q);
    double mean = p.mean();
    if (!(mean > 0.0))
      throw InsufficientBudgetError(
          "zq_support: degenerate moment (all inner products vanish)");
    double sd =
        std::sqrt((p - mean).square().sum() / double(p.size() - 1));
    est.value = std::pow(mean, 1.0 / q);
    est.std_error = power_mean_se(mean, sd / std::sqrt(double(p.size())), q);
  } else {
    // Large q: work with q log |g| to dodge overflow.
    Eigen::ArrayXd ga = g.abs().max(1e-300);
    est = detail::power_mean_log_space(ga, q);
  }
  est.value *= ny;
  est.std_error *= ny;
  est.sample_count = sample.count();
  est.seed = sample.seed;
  return est;
}

// h_q at many points at once: one GEMM panel per block of rows.  Returns one
// value per row of `points`; the frozen `sample` defines the functional.
inline Eigen::ArrayXd zq_support_batch(const PointSample& sample, double q,
                                       const Mat& points) {
  require(q >= 1.0, "zq_support_batch: q must be >= 1");
  require(points.cols() == sample.dim(),
          "zq_support_batch: dimension mismatch");
  const std::int64_t m = points.rows();
  Eigen::ArrayXd out(m);
  const std::int64_t block = 256;
  const double inv_q = 1.0 / q;
  Mat panel(std::min(block, std::max<std::int64_t>(m, 1)), sample.count());
  Eigen::ArrayXd row(sample.count());
  for (std::int64_t i0 = 0; i0 < m; i0 += block) {
    std::int64_t rows = std::min(block, m - i0);
    panel.topRows(rows).noalias() =
        points.middleRows(i0, rows) * sample.points.transpose();
    for (std::int64_t i = 0; i < rows; ++i) {
      row = panel.row(i).array();
      out[i0 + i] = std::pow(detail::abs_pow(row, q).mean(), inv_q);
    }
  }
  return out;
}

// Shared-sample evaluator for one (body, q) pair.
class ZqEvaluator {
 public:
  ZqEvaluator(Body body, double q, PointSample sample)
      : body_(std::move(body)), q_(q), sample_(std::move(sample)) {
    require(q_ >= 1.0, "ZqEvaluator: q must be >= 1");
    require(sample_.dim() == body_.dim(), "ZqEvaluator: sample dim mismatch");
  }

  ZqEvaluator(const Body& body, double q, std::int64_t budget,
              std::uint64_t seed)
      : ZqEvaluator(body, q,
                    sample_uniform(body, budget, substream(seed, "zq"))) {}

  const Body& body() const { return body_; }
  double q() const { return q_; }
  const PointSample& sample() const { return sample_; }

  // Support function of the moment body (cached per direction).
  Estimate support(const Vec& y) const {
    double ny = y.norm();
    if (ny == 0.0) return Estimate{0.0, 0.0, sample_.count(), sample_.seed};
    std::vector<double> key(y.size());
    for (int i = 0; i < y.size(); ++i) key[i] = y[i] / ny;
    auto it = cache_.find(key);
    Estimate unit_est;
    if (it != cache_.end()) {
      unit_est = it->second;
    } else {
      Vec u(y.size());
      for (int i = 0; i < y.size(); ++i) u[i] = key[i];
      unit_est = zq_support_from_sample(sample_, q_, u);
      cache_.emplace(std::move(key), unit_est);
    }
    unit_est.value *= ny;
    unit_est.std_error *= ny;
    return unit_est;
  }

  // The polar gauge ||x||_{(moment body)°} is numerically the same
  // functional; named separately so call sites say what they mean.
  Estimate polar_gauge(const Vec& x) const { return support(x); }

 private:
  Body body_;
  double q_;
  PointSample sample_;
  // Single-writer cache: evaluators are used from one thread at a time.
  mutable std::map<std::vector<double>, Estimate> cache_;
};

struct ZqRadius {
  Estimate value;
  Vec direction;
};

namespace detail {

// Golden-section maximization of f on [a, b].
template <typename F>
inline std::pair<double, double> golden_max(F&& f, double a, double b,
                                            int iters) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    }
  }
  return fc > fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

}  // namespace detail

// Radius max_theta h_q(theta): best direction on a sphere grid, then refined
// along great circles through the incumbent (50 golden-section iterations
// split over a handful of random circles).
inline ZqRadius zq_radius(const ZqEvaluator& ev, int grid_directions,
                          std::uint64_t seed, int refine_iters = 50) {
  require(grid_directions >= 1, "zq_radius: need at least one direction");
  const int n = ev.body().dim();
  DirectionSet grid =
      sample_sphere(n, grid_directions, substream(seed, "radius-grid"));
  Vec best = grid.direction(0);
  double best_val = ev.support(best).value;
  for (std::int64_t i = 1; i < grid.count(); ++i) {
    Vec d = grid.direction(i);
    double v = ev.support(d).value;
    if (v > best_val) {
      best_val = v;
      best = d;
    }
  }
  RngStream rng(seed, hash_tag("radius-refine"));
  const int circles = 5;
  int per_circle = std::max(1, refine_iters / circles);
  for (int c = 0; c < circles; ++c) {
    Vec u = rng.gaussian_vec(n);
    u -= best * best.dot(u);
    double un = u.norm();
    if (un < 1e-12) continue;
    u /= un;
    Vec anchor = best;
    auto f = [&](double t) {
      Vec theta = std::cos(t) * anchor + std::sin(t) * u;
      return ev.support(theta).value;
    };
    auto [t, v] = detail::golden_max(f, -0.6, 0.6, per_circle);
    if (v > best_val) {
      best_val = v;
      best = std::cos(t) * anchor + std::sin(t) * u;
      best.normalize();
    }
  }
  ZqRadius out;
  out.value = ev.support(best);
  out.direction = best;
  return out;
}

// r-th mean width ( int_{S^{n-1}} h_q^r dsigma )^{1/r}, r in (-n, inf), r != 0.
inline Estimate zq_width(const ZqEvaluator& ev, double r, int directions,
                         std::uint64_t seed) {
  require(directions > 1, "zq_width: need at least two directions");
  require(r > -ev.body().dim() && r != 0.0,
          "zq_width: order must lie in (-n, inf) \\ {0}");
  DirectionSet dirs =
      sample_sphere(ev.body().dim(), directions, substream(seed, "width"));
  Eigen::ArrayXd vals(dirs.count());
  for (std::int64_t i = 0; i < dirs.count(); ++i)
    vals[i] = ev.support(dirs.direction(i)).value;
  Estimate est = detail::power_mean_log_space(vals, r, seed);
  est.seed = seed;
  return est;
}

struct InclusionReport {
  double max_ratio = 0.0;
  Vec direction;
  Estimate h_q, h_p;  // at the maximizing direction
};

// max_theta h_q(theta) / h_p(theta) over a direction grid, both moments
// evaluated on the same sample (common random numbers), p <= q.
inline InclusionReport inclusion_ratio(const Body& body, double p, double q,
                                       int directions, std::int64_t budget,
                                       std::uint64_t seed) {
  require(1.0 <= p && p <= q, "inclusion_ratio: need 1 <= p <= q");
  PointSample sample =
      sample_uniform(body, budget, substream(seed, "inclusion"));
  DirectionSet dirs =
      sample_sphere(body.dim(), directions, substream(seed, "inclusion-dir"));
  InclusionReport rep;
  for (std::int64_t i = 0; i < dirs.count(); ++i) {
    Vec d = dirs.direction(i);
    Estimate hq = zq_support_from_sample(sample, q, d);
    Estimate hp = zq_support_from_sample(sample, p, d);
    double ratio = hq.value / hp.value;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.direction = d;
      rep.h_q = hq;
      rep.h_p = hp;
    }
  }
  return rep;
}

}  // namespace slicelab

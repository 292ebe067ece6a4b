#pragma once

// Uniform sampling from bodies, sphere directions, Haar rotations.
//
// Exact samplers exist for the catalog shapes (ball: radial power law; cube:
// product uniforms; l_p balls including the cross-polytope: generalized
// normal plus an independent exponential radial correction; simplex:
// exponential spacings) and push forward through affine images.  Everything
// else runs hit-and-run with gauge/bisection chord location.
//
// Determinism: point i of an exact sample is a function of (seed, i) only;
// MCMC output is split into fixed-size chains keyed by (seed, chain index).
// Either way the result for a given (seed, count) is bit-identical no matter
// how many threads or chunks produced it.

#include <cassert>
#include <cstdint>

#include "slicelab/body.hpp"
#include "slicelab/common.hpp"
#include "slicelab/rng.hpp"

namespace slicelab {

struct PointSample {
  Mat points;  // count x n, one point per row
  std::uint64_t seed = 0;
  bool exact = true;  // false when produced by a random walk
  int burn_in = 0;
  int thinning = 0;

  int dim() const { return static_cast<int>(points.cols()); }
  std::int64_t count() const { return points.rows(); }
  Vec point(std::int64_t i) const { return points.row(i).transpose(); }
};

struct DirectionSet {
  Mat directions;  // count x n, unit rows
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(directions.cols()); }
  std::int64_t count() const { return directions.rows(); }
  Vec direction(std::int64_t i) const {
    return directions.row(i).transpose();
  }
};

struct WalkOptions {
  int burn_in = -1;   // default 50 n
  int thinning = -1;  // default 2 n
  std::int64_t chunk = 4096;  // points per chain
};

// --- exact draws -----------------------------------------------------------

namespace detail {

inline Vec draw_exact_point(const Body& b, RngStream& rng);

struct ExactDraw {
  const Body* self;
  RngStream* rng;

  Vec operator()(const EuclideanBall& s) const {
    int n = self->dim();
    Vec dir = rng->unit_vec(n);
    double r = s.radius * std::pow(rng->u01(), 1.0 / n);
    return r * dir;
  }
  Vec operator()(const CubeShape& s) const {
    int n = self->dim();
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = s.side * (rng->u01() - 0.5);
    return x;
  }
  Vec operator()(const CrossPolytope& s) const {
    return lp_draw(1.0, s.scale);
  }
  Vec operator()(const LpBall& s) const {
    return lp_draw(s.exponent, s.scale);
  }
  Vec operator()(const SimplexShape& s) const {
    int n = self->dim();
    // Dirichlet(1,...,1) weights via exponential spacings.
    Vec w(n + 1);
    for (int i = 0; i <= n; ++i) w[i] = rng->exponential();
    w /= w.sum();
    if (s.centered)
      return s.scale * (s.unit_vertices.transpose() * w);
    return s.scale * w.head(n);  // vertices {0, s e_1, ..., s e_n}
  }
  Vec operator()(const AffineImageShape& s) const {
    return s.map.apply(draw_exact_point(*s.inner, *rng));
  }
  Vec operator()(const HPolytopeShape&) const { return unavailable(); }
  Vec operator()(const MinkowskiSumShape&) const { return unavailable(); }
  Vec operator()(const OracleShape&) const { return unavailable(); }

  Vec lp_draw(double p, double scale) const {
    // Generalized normal components g_i (density ~ exp(-|t|^p)) plus an
    // independent Exp(1) radial correction w:
    //   x = scale * g / (sum |g_i|^p + w)^{1/p}  is uniform on the l_p ball.
    int n = self->dim();
    Vec g(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double G = rng->gamma(1.0 / p);  // |g_i|^p ~ Gamma(1/p)
      double s = rng->u01() < 0.5 ? -1.0 : 1.0;
      g[i] = s * std::pow(G, 1.0 / p);
      sum += G;
    }
    sum += rng->exponential();
    return (scale / std::pow(sum, 1.0 / p)) * g;
  }
  Vec unavailable() const {
    throw OracleUnavailableError("exact sampler unavailable for " +
                                 self->label());
  }
};

inline Vec draw_exact_point(const Body& b, RngStream& rng) {
  return std::visit(ExactDraw{&b, &rng}, b.shape());
}

}  // namespace detail

// --- hit-and-run -----------------------------------------------------------

namespace detail {

// Chord {t : x + t d in K}: closed form for H-polytopes, membership bisection
// otherwise.  Requires x in K.
inline std::pair<double, double> chord(const Body& b, const Vec& x,
                                       const Vec& dir, double R) {
  if (const auto* s = std::get_if<HPolytopeShape>(&b.shape())) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    Vec ad = s->normals * dir;
    Vec slack = s->offsets - s->normals * x;
    for (int i = 0; i < ad.size(); ++i) {
      if (ad[i] > 1e-14)
        hi = std::min(hi, slack[i] / ad[i]);
      else if (ad[i] < -1e-14)
        lo = std::max(lo, slack[i] / ad[i]);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
      throw ChordError("hit_and_run: degenerate chord in polytope", x);
    return {lo, hi};
  }
  double tmax = R + x.norm() + 1.0;
  auto boundary = [&](double sign) {
    double inside = 0.0, outside = sign * tmax;
    if (b.contains(x + outside * dir)) return outside;  // numerical edge
    for (int it = 0; it < 64; ++it) {
      double mid = 0.5 * (inside + outside);
      (b.contains(x + mid * dir) ? inside : outside) = mid;
      if (std::abs(outside - inside) <= 1e-10 * tmax) break;
    }
    return inside;
  };
  return {boundary(-1.0), boundary(+1.0)};
}

}  // namespace detail

// One hit-and-run step from x.  R is a bounding radius for the body (pass
// body.bounding_radius(); kept as an argument so hot loops can cache it).
inline Vec hit_and_run_step(const Body& b, const Vec& x, RngStream& rng,
                            double R) {
  if (!b.contains(x))
    throw ChordError("hit_and_run: walk left the body " + b.label(), x);
  Vec dir = rng.unit_vec(b.dim());
  auto [lo, hi] = detail::chord(b, x, dir, R);
  double t = rng.uniform(lo, hi);
  Vec y = x + t * dir;
  if (!b.contains(y)) {
    // Clamp toward the interior point; the chord ends are located to 1e-10.
    y = x + 0.5 * t * dir;
    if (!b.contains(y))
      throw ChordError("hit_and_run: step left the body " + b.label(), y);
  }
  return y;
}

// --- public sampling entry points -----------------------------------------

inline PointSample sample_uniform(const Body& b, std::int64_t count,
                                  std::uint64_t seed,
                                  const WalkOptions& opts = {}) {
  require(count >= 0, "sample_uniform: negative count");
  const int n = b.dim();
  PointSample out;
  out.seed = seed;
  out.points.resize(count, n);
  if (b.has_exact_sampler()) {
    out.exact = true;
    for (std::int64_t i = 0; i < count; ++i) {
      RngStream rng(seed, static_cast<std::uint64_t>(i));
      Vec x = detail::draw_exact_point(b, rng);
#ifndef NDEBUG
      assert(b.contains(x) && "exact sampler produced a point outside");
#endif
      out.points.row(i) = x.transpose();
    }
    return out;
  }

  // Random walk.  Fixed-size chains make the output independent of how the
  // work is partitioned.
  out.exact = false;
  int burn = opts.burn_in >= 0 ? opts.burn_in : 50 * n;
  int thin = std::max(1, opts.thinning >= 0 ? opts.thinning : 2 * n);
  out.burn_in = burn;
  out.thinning = thin;
  if (!b.contains(Vec::Zero(n)))
    throw GeometryError(
        "sample_uniform: random walk starts at the origin, which is outside " +
        b.label() + "; center the body first");
  double R = b.bounding_radius();
  std::int64_t chunk = std::max<std::int64_t>(1, opts.chunk);
  std::int64_t chains = (count + chunk - 1) / chunk;
  std::int64_t written = 0;
  for (std::int64_t c = 0; c < chains; ++c) {
    RngStream rng(seed, substream(0xC4A1Bu, "chain", c));
    Vec x = Vec::Zero(n);
    for (int i = 0; i < burn; ++i) x = hit_and_run_step(b, x, rng, R);
    std::int64_t take = std::min(chunk, count - written);
    for (std::int64_t i = 0; i < take; ++i) {
      for (int s = 0; s < thin; ++s) x = hit_and_run_step(b, x, rng, R);
      out.points.row(written++) = x.transpose();
    }
  }
  return out;
}

inline DirectionSet sample_sphere(int n, std::int64_t count,
                                  std::uint64_t seed) {
  require(n >= 1, "sample_sphere: dimension must be >= 1");
  DirectionSet out;
  out.seed = seed;
  out.directions.resize(count, n);
  for (std::int64_t i = 0; i < count; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    out.directions.row(i) = rng.unit_vec(n).transpose();
  }
  return out;
}

// Haar-distributed rotation: QR of a Gaussian matrix with the sign of R's
// diagonal folded into Q (plain QR alone is not Haar).
inline Mat sample_rotation(int n, std::uint64_t seed) {
  require(n >= 1, "sample_rotation: dimension must be >= 1");
  RngStream rng(seed, hash_tag("rotation"));
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(n, n);
  Vec d = qr.matrixQR().diagonal();
  for (int j = 0; j < n; ++j)
    if (d[j] < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

// --- volume ----------------------------------------------------------------

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
  std::int64_t sample_count = 0;
};

// Closed-form volume when available, otherwise rejection sampling against the
// support bounding box (or the [-R, R]^n box for membership-only bodies).
inline VolumeEstimate estimate_volume(const Body& b, std::int64_t budget = 0,
                                      std::uint64_t seed = 0) {
  if (auto v = b.exact_volume()) return {*v, 0.0, true, 0};
  if (budget <= 0)
    throw InsufficientBudgetError(
        "estimate_volume: no closed-form volume for " + b.label() +
        "; provide a Monte-Carlo budget");
  const int n = b.dim();
  Vec lo(n), hi(n);
  double box_log = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    double a, c;
    try {
      a = b.support_homogeneous(e);
      c = b.support_homogeneous(-e);
    } catch (const OracleUnavailableError&) {
      a = c = b.bounding_radius();
    }
    hi[i] = a;
    lo[i] = -c;
    require(hi[i] > lo[i], "estimate_volume: empty box extent");
    box_log += std::log(hi[i] - lo[i]);
  }
  double box_vol = std::exp(box_log);
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < budget; ++t) {
    RngStream rng(seed, substream(0xB0D5u, "volume", t));
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(lo[i], hi[i]);
    if (b.contains(x)) ++hits;
  }
  double p = static_cast<double>(hits) / budget;
  if (hits == 0)
    throw InsufficientBudgetError(
        "estimate_volume: no hits in " + std::to_string(budget) +
        " rejection trials for " + b.label());
  double se = box_vol * std::sqrt(p * (1.0 - p) / budget);
  return {box_vol * p, se, false, budget};
}

// Homothet with volume one.  For shapes without closed-form volume the scale
// comes from an MC estimate whose standard error is reported via `info`.
inline Body volume_normalize(const Body& b, std::int64_t mc_budget = 0,
                             std::uint64_t seed = 0,
                             VolumeEstimate* info = nullptr) {
  VolumeEstimate v = estimate_volume(b, mc_budget, seed);
  if (info) *info = v;
  require(v.value > 0.0, "volume_normalize: nonpositive volume");
  return scale_body(b, std::pow(v.value, -1.0 / b.dim()));
}

}  // namespace slicelab

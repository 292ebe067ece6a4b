#pragma once

// Derived-body constructions and the audits that ride on them:
//   - the truncated moment body W (points of K where the q-th moment gauge
//     stays below a multiple of its K-average) and its volume-normalization,
//   - the convolution body K/L + (volume-one ball),
//   - sectional "ball bodies" defined by a one-sided moment gauge on a
//     subspace,
//   - the rotation-averaged slicing functional with its exact sphere-moment
//     constant,
//   - the max-moment (union bound) audit.
// Constructions freeze their defining samples so every derived membership
// test is a deterministic function of (parent, parameters, seed).

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "slicelab/body.hpp"
#include "slicelab/body_json.hpp"
#include "slicelab/centroid.hpp"
#include "slicelab/estimate.hpp"
#include "slicelab/isotropy.hpp"
#include "slicelab/moments.hpp"
#include "slicelab/sampling.hpp"

namespace slicelab {

// --- truncated moment body W ------------------------------------------------

struct WBodyBudget {
  NestedBudget slicing;        // for the threshold (body-average) estimate
  std::int64_t inner = 8192;   // frozen sample defining the membership gauge
  std::int64_t fraction = 20000;  // fresh draws for the volume fraction
};

struct WBody {
  Body parent;   // volume-one, near-isotropic
  double q;
  double c1;     // truncation multiplier (> 1)
  Estimate i1_hat;    // estimated body-average of the moment gauge
  double threshold;   // c1 * i1_hat.value
  std::shared_ptr<const PointSample> inner;  // frozen membership sample
  Estimate measured_fraction;                // |W| (parent volume ~ 1)
  Body body;                                 // deterministic membership oracle
};

// Membership gauge of W: the q-th moment support evaluated on the frozen
// sample.  Exposed so tests can probe the raw predicate.
inline double w_gauge(const WBody& w, const Vec& x) {
  return zq_support_from_sample(*w.inner, w.q, x).value;
}

inline WBody build_w_body(const Body& k, double q, double c1,
                          const WBodyBudget& budget, std::uint64_t seed) {
  require(q >= 1.0, "build_w_body: q must be >= 1");
  require(c1 > 1.0, "build_w_body: truncation multiplier must exceed 1");
  Estimate i1 = slicing_parameter(k, k, q, budget.slicing,
                                  substream(seed, "w-threshold"));
  if (i1.rel_error() > 0.05)
    throw InsufficientBudgetError(
        "build_w_body: threshold estimate has relative error " +
        format_double(i1.rel_error(), 4) + " > 5%; raise the budget");
  const double threshold = c1 * i1.value;
  auto inner = std::make_shared<const PointSample>(
      sample_uniform(k, budget.inner, substream(seed, "w-inner")));

  // Volume fraction from fresh parent draws, gauge evaluated in batch.
  PointSample fresh =
      sample_uniform(k, budget.fraction, substream(seed, "w-fraction"));
  Eigen::ArrayXd g = zq_support_batch(*inner, q, fresh.points);
  double hits = double((g <= threshold).count());
  double m = double(fresh.count());
  Estimate fraction;
  fraction.value = hits / m;
  fraction.std_error =
      std::sqrt(std::max(fraction.value * (1.0 - fraction.value), 0.0) / m);
  fraction.sample_count = fresh.count();
  fraction.seed = seed;
  require(fraction.value > 0.0, "build_w_body: empty truncation");

  json prov{{"kind", "truncated-moment-body"},
            {"parent", body_to_json(k)},
            {"q", q},
            {"c1", c1},
            {"seed", seed},
            {"budget",
             {{"inner", budget.inner},
              {"fraction", budget.fraction},
              {"outer", budget.slicing.outer},
              {"inner_slicing", budget.slicing.inner},
              {"replications", budget.slicing.replications}}}};
  Body parent_copy = k;
  auto inner_copy = inner;
  double qq = q;
  Body body =
      Body::oracle(
          k.dim(),
          [parent_copy, inner_copy, qq, threshold](const Vec& x) {
            return parent_copy.contains(x) &&
                   zq_support_from_sample(*inner_copy, qq, x).value <=
                       threshold;
          },
          k.bounding_radius(), fraction.value, prov.dump())
          .with_label(k.label() + "-truncated");
  return WBody{k,         q,      c1,       i1,
               threshold, inner,  fraction, std::move(body)};
}

// Uniform draws from W by rejection from the parent (valid because the
// construction keeps at least half the parent's volume in-regime; batches are
// seeded individually so the result is deterministic).
inline PointSample sample_w_interior(const WBody& w, std::int64_t count,
                                     std::uint64_t seed) {
  require(count > 0, "sample_w_interior: count must be positive");
  Mat out(count, w.parent.dim());
  std::int64_t have = 0;
  const std::int64_t batch = std::max<std::int64_t>(count, 4096);
  for (int b = 0; b < 64 && have < count; ++b) {
    PointSample draw = sample_uniform(
        w.parent, batch, substream(seed, "w-rejection", std::uint64_t(b)));
    Eigen::ArrayXd g = zq_support_batch(*w.inner, w.q, draw.points);
    for (std::int64_t i = 0; i < draw.count() && have < count; ++i)
      if (g[i] <= w.threshold) out.row(have++) = draw.points.row(i);
  }
  if (have < count)
    throw InsufficientBudgetError(
        "sample_w_interior: rejection acceptance too low (" + str(have) +
        "/" + str(count) + ")");
  PointSample s;
  s.points = std::move(out);
  s.seed = seed;
  s.exact = w.parent.has_exact_sampler();
  return s;
}

// --- factor-band support comparison ----------------------------------------

struct SandwichReport {
  double ratio_min = 0.0, ratio_max = 0.0;  // h_p(a-sample)/h_p(b-sample)
  double tol_min = 0.0, tol_max = 0.0;      // 3x combined SE in ratio units
  Vec argmin, argmax;
  int directions = 0;
};

// Direction-sampled ratio of two moment support functions at the same p.
inline SandwichReport support_sandwich(const PointSample& a,
                                       const PointSample& b, double p,
                                       int directions, std::uint64_t seed) {
  require(a.dim() == b.dim(), "support_sandwich: dimension mismatch");
  require(directions >= 1, "support_sandwich: need directions");
  DirectionSet dirs =
      sample_sphere(a.dim(), directions, substream(seed, "sandwich"));
  SandwichReport rep;
  rep.directions = directions;
  for (std::int64_t i = 0; i < dirs.count(); ++i) {
    Vec d = dirs.direction(i);
    Estimate ha = zq_support_from_sample(a, p, d);
    Estimate hb = zq_support_from_sample(b, p, d);
    double ratio = ha.value / hb.value;
    double tol =
        3.0 * ratio *
        std::sqrt(ha.rel_error() * ha.rel_error() +
                  hb.rel_error() * hb.rel_error());
    if (i == 0 || ratio < rep.ratio_min) {
      rep.ratio_min = ratio;
      rep.tol_min = tol;
      rep.argmin = d;
    }
    if (i == 0 || ratio > rep.ratio_max) {
      rep.ratio_max = ratio;
      rep.tol_max = tol;
      rep.argmax = d;
    }
  }
  return rep;
}

// --- normalized truncation K1 ----------------------------------------------

struct K1Checks {
  SandwichReport z2;  // h_2 of K1 against h_2 of the parent
  bool z2_ok = false;
  std::int64_t containment_violations = 0;  // x in K1 with x/2 outside parent
  bool containment_ok = false;
  Estimate second_moment;  // mean |x|^2 over K1 (volume-one body)
  double second_lo = 0.0, second_hi = 0.0;
  bool second_ok = false;
};

struct K1Result {
  Body k1;
  double scale;           // |W|^{-1/n}
  PointSample k1_sample;  // uniform in K1
  K1Checks checks;
};

inline K1Result normalize_k1(const WBody& w, double l_parent,
                             std::int64_t check_budget, std::uint64_t seed) {
  if (w.measured_fraction.value < 0.5)
    throw GeometryError(
        "normalize_k1: truncation kept only " +
        format_double(w.measured_fraction.value, 4) +
        " of the body; construction out of regime (needs >= 0.5)");
  const int n = w.parent.dim();
  const double scale = std::pow(w.measured_fraction.value, -1.0 / double(n));

  json prov{{"kind", "normalized-truncation"},
            {"w", json::parse(std::get<OracleShape>(w.body.shape()).provenance)},
            {"scale", scale}};
  Body wbody = w.body;
  Body k1 = Body::oracle(
                n,
                [wbody, scale](const Vec& x) {
                  return wbody.contains(x / scale);
                },
                w.body.bounding_radius() * scale, 1.0, prov.dump())
                .with_label(w.parent.label() + "-renormalized");

  // Uniform K1 sample: rejection draws from W, scaled up.
  PointSample ws =
      sample_w_interior(w, check_budget, substream(seed, "k1-sample"));
  PointSample k1s;
  k1s.points = ws.points * scale;
  k1s.seed = ws.seed;
  k1s.exact = ws.exact;

  PointSample parent_sample = sample_uniform(
      w.parent, check_budget, substream(seed, "k1-parent"));

  K1Checks checks;
  checks.z2 =
      support_sandwich(k1s, parent_sample, 2.0, 64, substream(seed, "k1-z2"));
  checks.z2_ok = checks.z2.ratio_min >= 0.5 - checks.z2.tol_min &&
                 checks.z2.ratio_max <= 2.0 + checks.z2.tol_max;

  checks.containment_violations = 0;
  for (std::int64_t i = 0; i < k1s.count(); ++i)
    if (!w.parent.contains(Vec(k1s.point(i) / 2.0)))
      ++checks.containment_violations;
  checks.containment_ok = checks.containment_violations == 0;

  RunningStat stat;
  for (std::int64_t i = 0; i < k1s.count(); ++i)
    stat.add(k1s.point(i).squaredNorm());
  checks.second_moment = stat.as_estimate(seed);
  checks.second_lo = double(n) * l_parent * l_parent / 4.0;
  checks.second_hi = 4.0 * double(n) * l_parent * l_parent;
  double slack = 3.0 * checks.second_moment.std_error;
  checks.second_ok =
      checks.second_moment.value >= checks.second_lo - slack &&
      checks.second_moment.value <= checks.second_hi + slack;

  return K1Result{std::move(k1), scale, std::move(k1s), std::move(checks)};
}

// --- regime bookkeeping (emitted, never asserted) ---------------------------

struct TruncationDiagnostics {
  int n;
  double q, i1, l;
  double c1, beta2, beta1_bar, kappa, rho;
  double c2;          // 16 * c1 * beta2 * beta1_bar
  double t0_sq, p0;
  bool p0_ge_q;
  bool q_le_rho2_n;        // q <= rho^2 n  (the admissible-q regime)
  bool i1_le_rho_n_l2;     // I1 <= rho n L^2 (membership screen)
  double implied_l_sq;     // kappa * max{1, I1/(sqrt(qn)L^2)} * sqrt(n/q) log^2 n
};

inline TruncationDiagnostics truncation_diagnostics(
    int n, double q, double i1, double l, double c1, double kappa = 1.0,
    double rho = 0.1, double beta2 = 1.0, double beta1_bar = 3.0 * std::exp(3.0)) {
  TruncationDiagnostics d;
  d.n = n;
  d.q = q;
  d.i1 = i1;
  d.l = l;
  d.c1 = c1;
  d.beta2 = beta2;
  d.beta1_bar = beta1_bar;
  d.kappa = kappa;
  d.rho = rho;
  d.c2 = 16.0 * c1 * beta2 * beta1_bar;
  double ln = std::log(double(n));
  double ratio = i1 / (std::sqrt(q * double(n)) * l * l);
  double bump = std::max(1.0, ratio);
  d.t0_sq = 16.0 * d.c2 * kappa * bump * std::pow(double(n), 1.5) /
            std::sqrt(q) * ln * ln;
  d.p0 = 4.0 * kappa * double(n) * double(n) * ln * ln / d.t0_sq;
  d.p0_ge_q = d.p0 >= q;
  d.q_le_rho2_n = q <= rho * rho * double(n);
  d.i1_le_rho_n_l2 = i1 <= rho * double(n) * l * l;
  d.implied_l_sq = kappa * bump * std::sqrt(double(n) / q) * ln * ln;
  return d;
}

// --- convolution body -------------------------------------------------------

struct ConvolutionBody {
  Body parent;
  double l_parent;      // isotropic constant used for the 1/L rescale
  double gamma;         // R(parent) / (sqrt(n) L)
  double ball_radius;   // radius of the volume-one ball summand
  Body sum;             // parent/L + ball  (raw Minkowski sum)
  Estimate sum_volume;
  Body body;            // sum rescaled to volume one
};

// Parent must be origin-symmetric (the support identity defining the sum
// needs it); for the sign/permutation-symmetric catalog the homothety to
// volume one is the entire isotropization.
inline ConvolutionBody build_convolution_body(const Body& k, double l_parent,
                                              std::uint64_t seed,
                                              std::int64_t volume_budget =
                                                  400000) {
  require(k.flags().origin_symmetric,
          "build_convolution_body: parent must be origin-symmetric");
  require(l_parent > 0.0, "build_convolution_body: L must be positive");
  const int n = k.dim();
  const double r_n = volume_one_ball_radius(n);
  const double gamma =
      k.bounding_radius() / (std::sqrt(double(n)) * l_parent);
  Body scaled = scale_body(k, 1.0 / l_parent);
  Body sum = Body::minkowski_sum(scaled, Body::ball(n, r_n))
                 .with_label(k.label() + "-convolution-raw");
  VolumeEstimate ve =
      estimate_volume(sum, volume_budget, substream(seed, "conv-volume"));
  Estimate vol;
  vol.value = ve.value;
  vol.std_error = ve.std_error;
  vol.sample_count = ve.sample_count;
  vol.seed = seed;
  Body body = scale_body(sum, std::pow(vol.value, -1.0 / double(n)))
                  .with_label(k.label() + "-convolution");
  return ConvolutionBody{k,   l_parent, gamma, r_n,
                         sum, vol,      body};
}

// --- sectional ball bodies --------------------------------------------------

// Gauge on a k-dimensional subspace F built from one-sided q-th moments of
// the parent: ||phi|| = |phi|^{1+q/(q+1)} ( mean_K <x,phi>_+^q )^{-1/(q+1)}.
// One frozen parent sample defines the functional; inner products with the
// basis are precomputed so evaluations cost O(sample size).
class BallBodyEvaluator {
 public:
  BallBodyEvaluator(Body parent, Mat basis, double q, std::int64_t budget,
                    std::uint64_t seed)
      : parent_(std::move(parent)),
        basis_(std::move(basis)),
        q_(q),
        sample_(sample_uniform(parent_, budget,
                               substream(seed, "ball-body"))),
        proj_(sample_.points * basis_) {
    require(q_ > 0.0, "BallBodyEvaluator: q must be positive");
    require(basis_.rows() == parent_.dim(),
            "BallBodyEvaluator: basis rows must match dimension");
    const int k = int(basis_.cols());
    require(k >= 1 && k < parent_.dim(),
            "BallBodyEvaluator: need 1 <= k < n");
    Mat gram = basis_.transpose() * basis_;
    require((gram - Mat::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-10,
            "BallBodyEvaluator: basis must be orthonormal");
  }

  const Body& parent() const { return parent_; }
  const Mat& basis() const { return basis_; }
  double q() const { return q_; }
  int subspace_dim() const { return int(basis_.cols()); }
  std::int64_t sample_count() const { return sample_.count(); }

  // phi in subspace coordinates (length = subspace_dim()).
  Estimate gauge_coords(const Vec& c) const {
    require(c.size() == basis_.cols(), "gauge_coords: wrong length");
    double nc = c.norm();
    require(nc > 0.0, "gauge_coords: phi must be nonzero");
    Eigen::ArrayXd t = (proj_ * c).array();
    std::int64_t positive = (t > 0.0).count();
    if (positive < 1000)
      throw InsufficientBudgetError(
          "ball-body gauge: only " + str(positive) +
          " samples in the positive halfspace (need 1000)");
    Eigen::ArrayXd tq = detail::abs_pow(t.max(0.0), q_);
    double v = tq.mean();
    double sd = std::sqrt((tq - v).square().sum() / double(tq.size() - 1));
    double se_v = sd / std::sqrt(double(tq.size()));
    Estimate out;
    out.value = std::pow(nc, 1.0 + q_ / (q_ + 1.0)) *
                std::pow(v, -1.0 / (q_ + 1.0));
    out.std_error = out.value * se_v / ((q_ + 1.0) * v);
    out.sample_count = tq.size();
    out.seed = sample_.seed;
    return out;
  }

  // phi in ambient coordinates; must lie in span(basis).
  Estimate gauge(const Vec& phi) const {
    require(phi.size() == parent_.dim(), "gauge: wrong length");
    Vec c = basis_.transpose() * phi;
    require((phi - basis_ * c).norm() <= 1e-8 * std::max(1.0, phi.norm()),
            "gauge: phi must lie in the subspace");
    return gauge_coords(c);
  }

 private:
  Body parent_;
  Mat basis_;
  double q_;
  PointSample sample_;
  Mat proj_;  // sample x basis inner products, frozen
};

inline Estimate ball_body_gauge(const BallBodyEvaluator& ev, const Vec& phi) {
  return ev.gauge(phi);
}

// The ball body as a k-dimensional membership body (unit ball of the gauge),
// for sampling and volume work in subspace coordinates.
inline Body ball_body_as_body(std::shared_ptr<const BallBodyEvaluator> ev,
                              std::uint64_t seed = 0x5ECB0D1ull) {
  const int k = ev->subspace_dim();
  // Bounding radius from a direction grid: radius along u is 1/gauge(u).
  DirectionSet dirs = sample_sphere(k, 64 * k, substream(seed, "bb-radius"));
  double r = 0.0;
  for (std::int64_t i = 0; i < dirs.count(); ++i)
    r = std::max(r, 1.0 / ev->gauge_coords(dirs.direction(i)).value);
  r *= 1.1;  // slack: the grid can miss the extremal direction
  auto member = [ev](const Vec& c) {
    return ev->gauge_coords(c).value <= 1.0;
  };
  return Body::oracle(k, member, r, std::nullopt,
                      json{{"kind", "sectional-ball-body"},
                           {"q", ev->q()},
                           {"k", k}}
                          .dump())
      .with_label(ev->parent().label() + "-ball-body");
}

// Uniform points in the ball body by rejection inside its bounding box
// (cheap because the gauge is directly evaluable and k is small); the same
// trial stream yields the volume estimate.
struct BallBodySample {
  PointSample points;
  Estimate volume;
  double radius_bound;
};

inline BallBodySample sample_ball_body(const BallBodyEvaluator& ev,
                                       std::int64_t count,
                                       std::uint64_t seed) {
  require(count > 0, "sample_ball_body: count must be positive");
  const int k = ev.subspace_dim();
  DirectionSet dirs =
      sample_sphere(k, 64 * k, substream(seed, "bb-bound"));
  double r = 0.0;
  for (std::int64_t i = 0; i < dirs.count(); ++i)
    r = std::max(r, 1.0 / ev.gauge_coords(dirs.direction(i)).value);
  r *= 1.1;  // slack: the grid can miss the extremal direction

  Mat out(count, k);
  std::int64_t have = 0, trials = 0, hits = 0;
  const std::int64_t batch = std::max<std::int64_t>(count, 4096);
  Vec u(k);
  for (int b = 0; b < 256 && have < count; ++b) {
    RngStream rng(substream(seed, "bb-draw", std::uint64_t(b)), 0);
    for (std::int64_t i = 0; i < batch; ++i) {
      for (int j = 0; j < k; ++j) u[j] = rng.uniform(-r, r);
      ++trials;
      if (ev.gauge_coords(u).value <= 1.0) {
        ++hits;
        if (have < count) out.row(have++) = u.transpose();
      }
    }
  }
  if (have < count)
    throw InsufficientBudgetError(
        "sample_ball_body: acceptance too low (" + str(have) + "/" +
        str(count) + ")");
  BallBodySample s;
  s.points.points = std::move(out);
  s.points.seed = seed;
  s.points.exact = true;
  double p = double(hits) / double(trials);
  s.volume.value = p * std::pow(2.0 * r, k);
  s.volume.std_error =
      std::pow(2.0 * r, k) * std::sqrt(p * (1.0 - p) / double(trials));
  s.volume.sample_count = trials;
  s.volume.seed = seed;
  s.radius_bound = r;
  return s;
}

// Isotropic constant of the ball body.  One-dimensional bodies have the
// closed form 12^{-1/2}; higher k uses rejection samples:
// L = det(covariance)^{1/(2k)} / volume^{1/k}  (affine-invariant form).
inline double ball_body_l_constant(const BallBodyEvaluator& ev,
                                   std::int64_t sample_budget,
                                   std::uint64_t seed) {
  const int k = ev.subspace_dim();
  if (k == 1) return std::sqrt(1.0 / 12.0);
  BallBodySample s = sample_ball_body(ev, sample_budget, seed);
  Vec center = center_of_mass(s.points).mean;
  Mat cov = covariance(s.points, center);
  double det = cov.determinant();
  require(det > 0.0, "ball_body_l_constant: degenerate covariance");
  return std::pow(det, 1.0 / (2.0 * double(k))) /
         std::pow(s.volume.value, 1.0 / double(k));
}

// --- sections through the origin -------------------------------------------

// Volume of the section K cap span(basis); closed form when the subspace is
// coordinate-aligned and the shape slices to a lower-dimensional copy of
// itself, otherwise rejection Monte Carlo inside the section.
inline std::pair<Estimate, bool> section_volume(const Body& k,
                                                const Mat& basis,
                                                std::int64_t budget,
                                                std::uint64_t seed) {
  const int n = k.dim();
  const int m = int(basis.cols());
  require(basis.rows() == n, "section_volume: basis rows must match n");
  require(m >= 1 && m < n, "section_volume: need 1 <= dim < n");
  Mat gram = basis.transpose() * basis;
  require((gram - Mat::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-10,
          "section_volume: basis must be orthonormal");

  // Coordinate-aligned?
  bool axis = true;
  for (int j = 0; j < m && axis; ++j) {
    int nonzero = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(basis(i, j)) > 1e-12) ++nonzero;
    if (nonzero != 1) axis = false;
  }
  if (axis) {
    Estimate out;
    out.sample_count = 0;
    out.seed = seed;
    if (const auto* s = std::get_if<CubeShape>(&k.shape())) {
      out.value = std::pow(s->side, m);
      return {out, true};
    }
    if (const auto* s = std::get_if<EuclideanBall>(&k.shape())) {
      out.value = unit_ball_volume(m) * std::pow(s->radius, m);
      return {out, true};
    }
    if (const auto* s = std::get_if<CrossPolytope>(&k.shape())) {
      out.value = std::pow(2.0 * s->scale, m) / std::tgamma(double(m) + 1.0);
      return {out, true};
    }
  }

  // Rejection inside the section: draw in the subspace box and test parent
  // membership of the embedded point.
  double r = k.bounding_radius();
  RngStream rng(substream(seed, "section"), 0);
  std::int64_t hits = 0;
  Vec u(m);
  for (std::int64_t i = 0; i < budget; ++i) {
    for (int j = 0; j < m; ++j) u[j] = rng.uniform(-r, r);
    if (k.contains(basis * u)) ++hits;
  }
  if (hits == 0)
    throw InsufficientBudgetError("section_volume: no hits in section box");
  double p = double(hits) / double(budget);
  Estimate out;
  out.value = p * std::pow(2.0 * r, m);
  out.std_error = std::pow(2.0 * r, m) *
                  std::sqrt(p * (1.0 - p) / double(budget));
  out.sample_count = budget;
  out.seed = seed;
  return {out, false};
}

// --- KB section/ball-body ratio report --------------------------------------

struct KbBudget {
  std::int64_t parent_sample = 50000;  // defines the ball-body gauge
  std::int64_t body_sample = 4000;     // rejection draws in the body (k >= 2)
  std::int64_t section = 200000;       // MC fallback for |K cap F|
};

struct KbReport {
  int k;
  double p;
  Estimate section;       // |K cap span(basis_perp)|
  bool section_exact;
  double l_b;             // isotropic constant of the (k+1)-moment ball body
  double l_parent;
  double kb1_ratio;       // section^{1/k} / (l_b / l_parent)
  // Support comparison h_p(normalized ball body) vs section^{1/k} h_p(K) at
  // directions inside F; min and max over the tested directions.
  double kb2_min, kb2_max;
};

// basis: n x k orthonormal frame of F; basis_perp: n x (n-k) frame of its
// orthogonal complement (used for the section volume).
inline KbReport kb_ratio_report(const Body& k_body, const Mat& basis,
                                const Mat& basis_perp, double p,
                                double l_parent, const KbBudget& budget,
                                std::uint64_t seed) {
  const int n = k_body.dim();
  const int k = int(basis.cols());
  require(p >= 1.0 && p <= double(k), "kb_ratio_report: need 1 <= p <= k");
  require(int(basis_perp.cols()) == n - k,
          "kb_ratio_report: complement frame has wrong width");

  auto [sec, sec_exact] = section_volume(
      k_body, basis_perp, budget.section, substream(seed, "kb-section"));
  double sec_pow = std::pow(sec.value, 1.0 / double(k));

  BallBodyEvaluator ev(k_body, basis, double(k) + 1.0, budget.parent_sample,
                       substream(seed, "kb-gauge"));
  double l_b =
      ball_body_l_constant(ev, budget.body_sample, substream(seed, "kb-lb"));
  KbReport rep;
  rep.k = k;
  rep.p = p;
  rep.section = sec;
  rep.section_exact = sec_exact;
  rep.l_b = l_b;
  rep.l_parent = l_parent;
  rep.kb1_ratio = sec_pow / (l_b / l_parent);

  // Parent-side p-moment support along directions of F.
  PointSample parent_sample = sample_uniform(
      k_body, budget.parent_sample, substream(seed, "kb-parent"));

  auto h_parent = [&](const Vec& c) {
    return zq_support_from_sample(parent_sample, p, Vec(basis * c)).value;
  };

  double lo = 0.0, hi = 0.0;
  if (k == 1) {
    // Closed-form path: the ball body is the segment [-1/g(-e), 1/g(e)];
    // normalize to length one and use the exact one-dimensional p-moment.
    Vec e = Vec::Ones(1);
    double a = 1.0 / ev.gauge_coords(e).value;
    double b = 1.0 / ev.gauge_coords(Vec(-e)).value;
    double len = a + b;
    double an = a / len, bn = b / len;
    auto seg_moment = [p](double pos, double neg) {
      return std::pow((std::pow(pos, p + 1.0) + std::pow(neg, p + 1.0)) /
                          (p + 1.0),
                      1.0 / p);
    };
    double r_plus = seg_moment(an, bn) / (sec_pow * h_parent(e));
    double r_minus = seg_moment(bn, an) / (sec_pow * h_parent(Vec(-e)));
    lo = std::min(r_plus, r_minus);
    hi = std::max(r_plus, r_minus);
  } else {
    BallBodySample bs =
        sample_ball_body(ev, budget.body_sample, substream(seed, "kb-walk"));
    double norm = std::pow(bs.volume.value, -1.0 / double(k));
    PointSample bn;
    bn.points = bs.points.points * norm;
    bn.seed = bs.points.seed;
    DirectionSet dirs =
        sample_sphere(k, 32, substream(seed, "kb-dirs"));
    for (std::int64_t i = 0; i < dirs.count(); ++i) {
      Vec c = dirs.direction(i);
      double num = zq_support_from_sample(bn, p, c).value;
      double ratio = num / (sec_pow * h_parent(c));
      if (i == 0 || ratio < lo) lo = ratio;
      if (i == 0 || ratio > hi) hi = ratio;
    }
  }
  rep.kb2_min = lo;
  rep.kb2_max = hi;
  return rep;
}

// --- max-moment (union bound) audit ----------------------------------------

struct MaxMomentAudit {
  Estimate lhs;     // ( mean max_i |<x, z_i>|^q )^{1/q}
  double p;         // max{log N, q}
  double max_hzp;   // max_i h_p(z_i)
  double rhs;       // bound_const * max_hzp
  bool ok;          // lhs <= rhs within 3 SE
  double margin;    // rhs / lhs
  double max_hzq;         // max_i h_q(z_i)  (crossover report)
  double crossover_ratio;  // lhs / max_hzq
  double crossover_factor; // max{1, log N / q}
};

inline MaxMomentAudit max_moment_audit(const PointSample& sample,
                                       const Mat& zs, double q,
                                       double bound_const) {
  require(zs.cols() == sample.dim(), "max_moment_audit: dimension mismatch");
  require(zs.rows() >= 1, "max_moment_audit: need test points");
  const double logn = std::log(double(zs.rows()));
  const double p = std::max(logn, q);

  Mat g = sample.points * zs.transpose();
  Eigen::ArrayXd row_max = g.cwiseAbs().rowwise().maxCoeff().array();
  Eigen::ArrayXd mq = detail::abs_pow(row_max, q);
  double mean = mq.mean();
  double sd = std::sqrt((mq - mean).square().sum() / double(mq.size() - 1));
  MaxMomentAudit audit;
  audit.lhs.value = std::pow(mean, 1.0 / q);
  audit.lhs.std_error =
      power_mean_se(mean, sd / std::sqrt(double(mq.size())), q);
  audit.lhs.sample_count = sample.count();
  audit.lhs.seed = sample.seed;
  audit.p = p;

  double max_hzp = 0.0, max_hzp_se = 0.0, max_hzq = 0.0;
  for (std::int64_t i = 0; i < zs.rows(); ++i) {
    Vec z = zs.row(i).transpose();
    Estimate hp = zq_support_from_sample(sample, p, z);
    if (hp.value > max_hzp) {
      max_hzp = hp.value;
      max_hzp_se = hp.std_error;
    }
    max_hzq = std::max(max_hzq,
                       zq_support_from_sample(sample, q, z).value);
  }
  audit.max_hzp = max_hzp;
  audit.rhs = bound_const * max_hzp;
  double slack =
      3.0 * (audit.lhs.std_error + bound_const * max_hzp_se);
  audit.ok = audit.lhs.value <= audit.rhs + slack;
  audit.margin = audit.rhs / audit.lhs.value;
  audit.max_hzq = max_hzq;
  audit.crossover_ratio = audit.lhs.value / max_hzq;
  audit.crossover_factor = std::max(1.0, logn / q);
  return audit;
}

// --- rotation-averaged slicing functional -----------------------------------

struct RotationAverageResult {
  Estimate mean_pow;   // ( avg_U I1(U)^q )^{1/q}
  double c_nq;         // exact q-th absolute moment constant of the sphere
  Estimate iq;         // q-th radial moment of the body
  double rhs;          // c_nq * iq^2
  bool ok;             // mean_pow <= rhs within 3 combined SE
  double tol;          // the combined relative tolerance used
  double fraction_small;  // share of rotations with I1 <= small_const sqrt(qn) L^2
  double small_const;
  std::vector<double> i1_per_rotation;
};

// Average of I1(K, q-moment gauge of U K) over Haar rotations U.  The same
// two point clouds serve every rotation (common random numbers); rotating
// the inner cloud is exact because <x, U y> = <x, (U y)>.
inline RotationAverageResult rotation_average(const Body& k, double q,
                                              int rotations,
                                              std::int64_t outer,
                                              std::int64_t inner,
                                              std::uint64_t seed, double l_k,
                                              double small_const = 2.0) {
  require(rotations >= 32, "rotation_average: need at least 32 rotations");
  require(q >= 1.0, "rotation_average: q must be >= 1");
  const int n = k.dim();
  PointSample xs =
      sample_uniform(k, outer, substream(seed, "rotation-outer"));
  PointSample ys =
      sample_uniform(k, inner, substream(seed, "rotation-inner"));

  RotationAverageResult res;
  res.i1_per_rotation.reserve(std::size_t(rotations));
  Mat rotated(ys.count(), n);
  for (int r = 0; r < rotations; ++r) {
    Mat u = sample_rotation(n, substream(seed, "rotation-haar",
                                         std::uint64_t(r)));
    rotated.noalias() = ys.points * u.transpose();
    res.i1_per_rotation.push_back(
        detail::nested_mean(xs.points, rotated, q));
  }

  Eigen::ArrayXd i1 = Eigen::Map<const Eigen::ArrayXd>(
      res.i1_per_rotation.data(), std::int64_t(res.i1_per_rotation.size()));
  Eigen::ArrayXd i1q = detail::abs_pow(i1, q);
  double mean = i1q.mean();
  double sd =
      std::sqrt((i1q - mean).square().sum() / double(i1q.size() - 1));
  res.mean_pow.value = std::pow(mean, 1.0 / q);
  res.mean_pow.std_error =
      power_mean_se(mean, sd / std::sqrt(double(i1q.size())), q);
  res.mean_pow.sample_count = rotations;
  res.mean_pow.seed = seed;

  res.c_nq = sphere_moment_constant(n, q);
  MomentResult iq = radial_moment(xs, q);
  res.iq = iq.est;
  res.rhs = res.c_nq * res.iq.value * res.iq.value;
  res.tol = 3.0 * std::sqrt(res.mean_pow.rel_error() * res.mean_pow.rel_error() +
                            4.0 * res.iq.rel_error() * res.iq.rel_error());
  res.ok = res.mean_pow.value <= res.rhs * (1.0 + res.tol);

  double cut = small_const * std::sqrt(q * double(n)) * l_k * l_k;
  res.fraction_small = double((i1 <= cut).count()) / double(i1.size());
  res.small_const = small_const;
  return res;
}

// --- rebuilding serialized derived bodies -----------------------------------

// Counterpart of the "derived" branch in the JSON body schema: re-runs the
// construction recorded in the provenance block (deterministic given the
// stored seed and budgets).
inline Body rebuild_derived_body(const json& j,
                                 const std::string& path = "body") {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError(path, "derived body needs a 'kind' field");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "truncated-moment-body") {
    Body parent = body_from_json(j.at("parent"), path + ".parent");
    WBodyBudget budget;
    const json& b = j.at("budget");
    budget.inner = b.at("inner").get<std::int64_t>();
    budget.fraction = b.at("fraction").get<std::int64_t>();
    budget.slicing.outer = b.at("outer").get<std::int64_t>();
    budget.slicing.inner = b.at("inner_slicing").get<std::int64_t>();
    budget.slicing.replications = b.at("replications").get<int>();
    WBody w = build_w_body(parent, j.at("q").get<double>(),
                           j.at("c1").get<double>(), budget,
                           j.at("seed").get<std::uint64_t>());
    return w.body;
  }
  if (kind == "normalized-truncation") {
    Body w = rebuild_derived_body(j.at("w"), path + ".w");
    double scale = j.at("scale").get<double>();
    json prov{{"kind", "normalized-truncation"},
              {"w", j.at("w")},
              {"scale", scale}};
    return Body::oracle(
               w.dim(),
               [w, scale](const Vec& x) { return w.contains(x / scale); },
               w.bounding_radius() * scale, 1.0, prov.dump())
        .with_label(w.label() + "-renormalized");
  }
  throw ConfigError(path + ".kind", "unknown derived-body kind '" + kind + "'");
}

}  // namespace slicelab

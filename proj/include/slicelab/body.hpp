#pragma once

// Convex body catalog and its oracles.
//
// A Body is an immutable tagged union over a small catalog of shapes (balls,
// cubes, cross-polytopes, l_p balls, simplices, H-polytopes) plus three
// combinators: affine images, Minkowski sums, and membership-oracle bodies
// produced by constructions elsewhere in the library.  Each shape provides
// whichever of {membership, support, gauge, nearest point, volume} it can in
// closed form; the rest fall back to generic routines (bisection for gauges,
// an LP for polytope support) or raise OracleUnavailableError.

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "slicelab/affine.hpp"
#include "slicelab/common.hpp"
#include "slicelab/detail/simplex_lp.hpp"

namespace slicelab {

class Body;

// --- shape payloads --------------------------------------------------------

struct EuclideanBall {
  double radius;
};

// Axis-parallel cube [-side/2, side/2]^n.
struct CubeShape {
  double side;
};

// {x : ||x||_1 <= scale}.
struct CrossPolytope {
  double scale;
};

// {x : ||x||_p <= scale}, p in [1, inf).
struct LpBall {
  double exponent;
  double scale;
};

// Regular simplex.  centered = true: circumradius `scale`, centroid at the
// origin (vertices = scale * rows of `unit_vertices`).  centered = false:
// conv{0, scale*e_1, ..., scale*e_n}, useful for exercising centering code.
struct SimplexShape {
  double scale;
  bool centered;
  Mat unit_vertices;  // (n+1) x n, unit circumradius; empty for corner form
};

// {x : normals * x <= offsets}, rows of `normals` unit length, offsets > 0
// (origin interior).
struct HPolytopeShape {
  Mat normals;
  Vec offsets;
};

struct AffineImageShape {
  std::shared_ptr<const Body> inner;
  AffineMap map;
};

struct MinkowskiSumShape {
  std::shared_ptr<const Body> a;
  std::shared_ptr<const Body> b;
};

// Membership-only body (e.g. a truncation produced by a construction).  The
// predicate must be deterministic; `volume` is carried when the construction
// measured it.
struct OracleShape {
  std::function<bool(const Vec&)> member;
  double bounding_radius;
  std::optional<double> volume;
  std::string provenance;  // JSON text describing how to rebuild this body
};

using Shape =
    std::variant<EuclideanBall, CubeShape, CrossPolytope, LpBall, SimplexShape,
                 HPolytopeShape, AffineImageShape, MinkowskiSumShape,
                 OracleShape>;

struct BodyFlags {
  bool origin_symmetric = false;
  bool unconditional = false;  // implies origin_symmetric
};

// --- body ------------------------------------------------------------------

class Body {
 public:
  static Body ball(int n, double radius = 1.0);
  static Body cube(int n, double side = 1.0);
  static Body cross_polytope(int n, double scale = 1.0);
  static Body lp_ball(int n, double p, double scale = 1.0);
  static Body simplex(int n, double scale = 1.0, bool centered = true);
  static Body h_polytope(Mat normals, Vec offsets);
  static Body affine_image(Body inner, AffineMap map);
  static Body minkowski_sum(Body a, Body b);
  static Body oracle(int n, std::function<bool(const Vec&)> member,
                     double bounding_radius,
                     std::optional<double> volume = std::nullopt,
                     std::string provenance = "{}");

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  const BodyFlags& flags() const { return flags_; }
  const std::string& label() const { return label_; }
  Body with_label(std::string label) const {
    Body b = *this;
    b.label_ = std::move(label);
    return b;
  }

  bool contains(const Vec& x) const;

  // Support function h(y) for unit y; rejects non-unit directions so callers
  // cannot silently mix normalizations.
  double support(const Vec& direction) const;

  // Positively homogeneous support, defined for every y (h(0) = 0).
  double support_homogeneous(const Vec& y) const;

  // Minkowski gauge ||x||_K = inf{ t > 0 : x in tK }.  Requires the origin in
  // the interior; closed-form where available, otherwise bisection on
  // membership to relative tolerance 1e-8.
  double gauge(const Vec& x) const;

  // Radius of an origin-centered ball guaranteed to contain the body
  // (exact circumradius for catalog shapes, an upper bound for combinators).
  double bounding_radius() const;

  std::optional<double> exact_volume() const;

  bool has_nearest_point() const;
  Vec nearest_point(const Vec& x) const;

  // True when an exact (non-MCMC) uniform sampler exists for this shape.
  bool has_exact_sampler() const;

  bool is_volume_normalized(double tol = 1e-9) const {
    auto v = exact_volume();
    return v && std::abs(*v - 1.0) <= tol;
  }

 private:
  Body(int dim, Shape shape, BodyFlags flags, std::string label)
      : dim_(dim),
        shape_(std::move(shape)),
        flags_(flags),
        label_(std::move(label)) {}

  int dim_;
  Shape shape_;
  BodyFlags flags_;
  std::string label_;

  friend Body scale_body(const Body& b, double lambda);
  friend Body apply_affine(const Body& b, const AffineMap& map);
};

// Homothety lambda * K (lambda > 0), staying inside the catalog.
Body scale_body(const Body& b, double lambda);

// T(K) + t.  Composes with existing affine layers; Minkowski sums distribute.
Body apply_affine(const Body& b, const AffineMap& map);

// If the body is (a linear similarity image of) a centered Euclidean ball,
// its radius; used to specialize Minkowski-sum oracles.
std::optional<double> as_ball_radius(const Body& b);

// Gauge by bisection on membership (shared by combinator shapes).
double gauge_by_bisection(const Body& b, const Vec& x, double rel_tol = 1e-8);

// --- detail helpers --------------------------------------------------------

namespace detail {

// Unit vertices of the regular simplex in R^n: the centered standard basis of
// R^{n+1} rotated into the hyperplane sum = 0 via a Householder reflection,
// then normalized to unit circumradius.
inline Mat regular_simplex_vertices(int n) {
  const int m = n + 1;
  Vec ones = Vec::Constant(m, 1.0 / std::sqrt(double(m)));
  Vec w = ones;
  w[m - 1] -= 1.0;  // reflector sending the ones-direction to e_m
  Mat H = Mat::Identity(m, m);
  double wn = w.norm();
  if (wn > 1e-14) {
    w /= wn;
    H -= 2.0 * w * w.transpose();
  }
  Mat verts(m, n);
  for (int i = 0; i < m; ++i) {
    Vec v = Vec::Zero(m);
    v[i] = 1.0;
    v -= ones * ones.dot(v);
    Vec r = H * v;  // last coordinate ~ 0 after reflection
    verts.row(i) = (r.head(n) / r.head(n).norm()).transpose();
  }
  return verts;
}

// Projection onto the l1 ball of radius s (sort-based algorithm).
inline Vec project_l1_ball(const Vec& x, double s) {
  if (x.lpNorm<1>() <= s) return x;
  const int n = static_cast<int>(x.size());
  std::vector<double> a(n);
  for (int i = 0; i < n; ++i) a[i] = std::abs(x[i]);
  std::sort(a.begin(), a.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += a[k];
    double t = (cum - s) / (k + 1);
    if (k == n - 1 || a[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  Vec p(n);
  for (int i = 0; i < n; ++i) {
    double m = std::abs(x[i]) - theta;
    p[i] = m > 0.0 ? (x[i] > 0.0 ? m : -m) : 0.0;
  }
  return p;
}

inline double membership_slack(double scale) {
  return 1e-12 * std::max(1.0, scale);
}

// Volume of the regular centered simplex with circumradius 1 in R^n.
inline double regular_simplex_volume(int n) {
  // (n+1)^{(n+1)/2} / (n! n^{n/2})
  double logv = 0.5 * (n + 1) * std::log(double(n + 1)) -
                std::lgamma(double(n + 1)) - 0.5 * n * std::log(double(n));
  return std::exp(logv);
}

}  // namespace detail

// --- factories -------------------------------------------------------------

inline Body Body::ball(int n, double radius) {
  require(n >= 1 && radius > 0.0, "ball: need n >= 1 and radius > 0");
  return Body(n, EuclideanBall{radius}, BodyFlags{true, true},
              "ball(n=" + std::to_string(n) + ")");
}

inline Body Body::cube(int n, double side) {
  require(n >= 1 && side > 0.0, "cube: need n >= 1 and side > 0");
  return Body(n, CubeShape{side}, BodyFlags{true, true},
              "cube(n=" + std::to_string(n) + ")");
}

inline Body Body::cross_polytope(int n, double scale) {
  require(n >= 1 && scale > 0.0, "cross_polytope: need n >= 1 and scale > 0");
  return Body(n, CrossPolytope{scale}, BodyFlags{true, true},
              "cross(n=" + std::to_string(n) + ")");
}

inline Body Body::lp_ball(int n, double p, double scale) {
  require(n >= 1 && scale > 0.0, "lp_ball: need n >= 1 and scale > 0");
  require(p >= 1.0 && std::isfinite(p),
          "lp_ball: exponent must lie in [1, inf)");
  return Body(n, LpBall{p, scale}, BodyFlags{true, true},
              "lp(p=" + format_double(p, 4) + ",n=" + std::to_string(n) + ")");
}

inline Body Body::simplex(int n, double scale, bool centered) {
  require(n >= 1 && scale > 0.0, "simplex: need n >= 1 and scale > 0");
  Mat verts = centered ? detail::regular_simplex_vertices(n) : Mat();
  return Body(n, SimplexShape{scale, centered, std::move(verts)},
              BodyFlags{false, false}, "simplex(n=" + std::to_string(n) + ")");
}

inline Body Body::h_polytope(Mat normals, Vec offsets) {
  require(normals.rows() == offsets.size(),
          "h_polytope: normals/offsets row mismatch");
  require(normals.rows() >= normals.cols() + 1,
          "h_polytope: too few facets to bound a body");
  const int n = static_cast<int>(normals.cols());
  for (int i = 0; i < normals.rows(); ++i) {
    double len = normals.row(i).norm();
    require(len > 1e-14, "h_polytope: zero normal in row " + std::to_string(i));
    normals.row(i) /= len;
    offsets[i] /= len;
    require(offsets[i] > 0.0,
            "h_polytope: offset " + std::to_string(i) +
                " not positive; the origin must be interior");
  }
  return Body(n, HPolytopeShape{std::move(normals), std::move(offsets)},
              BodyFlags{false, false}, "hpoly(n=" + std::to_string(n) + ")");
}

inline Body Body::affine_image(Body inner, AffineMap map) {
  require(inner.dim() == map.dim(), "affine_image: dimension mismatch");
  // Collapse nested affine layers.
  if (auto* ai = std::get_if<AffineImageShape>(&inner.shape_)) {
    AffineMap composed = map.compose(ai->map);
    Body base = *ai->inner;
    return affine_image(std::move(base), std::move(composed));
  }
  BodyFlags flags;
  bool linear = map.translation().norm() <= 1e-14;
  bool diagonal = (map.matrix() - Mat(map.matrix().diagonal().asDiagonal()))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-14;
  flags.origin_symmetric = inner.flags().origin_symmetric && linear;
  flags.unconditional = inner.flags().unconditional && linear && diagonal;
  int n = inner.dim();
  std::string label = "affine[" + inner.label() + "]";
  auto holder = std::make_shared<const Body>(std::move(inner));
  return Body(n, AffineImageShape{std::move(holder), std::move(map)}, flags,
              std::move(label));
}

inline Body Body::minkowski_sum(Body a, Body b) {
  require(a.dim() == b.dim(), "minkowski_sum: dimension mismatch");
  BodyFlags flags;
  flags.origin_symmetric =
      a.flags().origin_symmetric && b.flags().origin_symmetric;
  flags.unconditional = a.flags().unconditional && b.flags().unconditional;
  int n = a.dim();
  std::string label = "sum[" + a.label() + "+" + b.label() + "]";
  auto ha = std::make_shared<const Body>(std::move(a));
  auto hb = std::make_shared<const Body>(std::move(b));
  return Body(n, MinkowskiSumShape{std::move(ha), std::move(hb)}, flags,
              std::move(label));
}

inline Body Body::oracle(int n, std::function<bool(const Vec&)> member,
                         double bounding_radius, std::optional<double> volume,
                         std::string provenance) {
  require(n >= 1 && bounding_radius > 0.0,
          "oracle: need n >= 1 and a positive bounding radius");
  require(static_cast<bool>(member), "oracle: empty membership predicate");
  return Body(n,
              OracleShape{std::move(member), bounding_radius, volume,
                          std::move(provenance)},
              BodyFlags{false, false}, "oracle(n=" + std::to_string(n) + ")");
}

// --- ball detection --------------------------------------------------------

inline std::optional<double> as_ball_radius(const Body& b) {
  if (const auto* s = std::get_if<EuclideanBall>(&b.shape())) return s->radius;
  if (const auto* s = std::get_if<LpBall>(&b.shape())) {
    if (s->exponent == 2.0) return s->scale;
  }
  if (const auto* s = std::get_if<AffineImageShape>(&b.shape())) {
    if (s->map.translation().norm() <= 1e-14 && s->map.is_similarity()) {
      if (auto r = as_ball_radius(*s->inner))
        return *r * s->map.similarity_scale();
    }
  }
  return std::nullopt;
}

// --- nearest point ---------------------------------------------------------

inline bool Body::has_nearest_point() const {
  struct V {
    bool operator()(const EuclideanBall&) const { return true; }
    bool operator()(const CubeShape&) const { return true; }
    bool operator()(const CrossPolytope&) const { return true; }
    bool operator()(const LpBall& s) const { return s.exponent == 2.0; }
    bool operator()(const SimplexShape&) const { return false; }
    bool operator()(const HPolytopeShape&) const { return false; }
    bool operator()(const AffineImageShape& s) const {
      return s.map.is_similarity() && s.inner->has_nearest_point();
    }
    bool operator()(const MinkowskiSumShape& s) const {
      return s.a->has_nearest_point() && as_ball_radius(*s.b).has_value();
    }
    bool operator()(const OracleShape&) const { return false; }
  };
  return std::visit(V{}, shape_);
}

inline Vec Body::nearest_point(const Vec& x) const {
  require(x.size() == dim_, "nearest_point: dimension mismatch");
  struct V {
    const Body* self;
    const Vec& x;
    Vec operator()(const EuclideanBall& s) const {
      double n = x.norm();
      return n <= s.radius ? x : Vec(x * (s.radius / n));
    }
    Vec operator()(const CubeShape& s) const {
      return x.cwiseMax(-0.5 * s.side).cwiseMin(0.5 * s.side);
    }
    Vec operator()(const CrossPolytope& s) const {
      return detail::project_l1_ball(x, s.scale);
    }
    Vec operator()(const LpBall& s) const {
      if (s.exponent == 2.0) {
        double n = x.norm();
        return n <= s.scale ? x : Vec(x * (s.scale / n));
      }
      throw OracleUnavailableError(
          "nearest_point: unsupported for l_p balls with p != 2");
    }
    Vec operator()(const AffineImageShape& s) const {
      if (!s.map.is_similarity())
        throw OracleUnavailableError(
            "nearest_point: affine image is not a similarity (" +
            self->label() + ")");
      return s.map.apply(s.inner->nearest_point(s.map.apply_inverse(x)));
    }
    Vec operator()(const MinkowskiSumShape& s) const {
      auto rb = as_ball_radius(*s.b);
      if (!rb || !s.a->has_nearest_point())
        throw OracleUnavailableError(
            "nearest_point: Minkowski sum needs nearest-point summand plus a "
            "ball (" + self->label() + ")");
      Vec pa = s.a->nearest_point(x);
      Vec d = x - pa;
      double dist = d.norm();
      if (dist <= *rb) return x;
      return pa + d * (*rb / dist);
    }
    Vec operator()(const SimplexShape&) const { return unsupported(); }
    Vec operator()(const HPolytopeShape&) const { return unsupported(); }
    Vec operator()(const OracleShape&) const { return unsupported(); }
    Vec unsupported() const {
      throw OracleUnavailableError("nearest_point: unsupported shape (" +
                                   self->label() + ")");
    }
  };
  return std::visit(V{this, x}, shape_);
}

// --- membership ------------------------------------------------------------

inline bool Body::contains(const Vec& x) const {
  require(x.size() == dim_, "contains: dimension mismatch");
  struct V {
    const Body* self;
    const Vec& x;
    bool operator()(const EuclideanBall& s) const {
      return x.norm() <= s.radius + detail::membership_slack(s.radius);
    }
    bool operator()(const CubeShape& s) const {
      return x.cwiseAbs().maxCoeff() <=
             0.5 * s.side + detail::membership_slack(s.side);
    }
    bool operator()(const CrossPolytope& s) const {
      return x.lpNorm<1>() <= s.scale + detail::membership_slack(s.scale);
    }
    bool operator()(const LpBall& s) const {
      double acc = 0.0;
      for (int i = 0; i < x.size(); ++i)
        acc += std::pow(std::abs(x[i]) / s.scale, s.exponent);
      return acc <= 1.0 + 1e-12;
    }
    bool operator()(const SimplexShape& s) const {
      double slack = detail::membership_slack(s.scale);
      if (s.centered) {
        Vec dots = s.unit_vertices * x;
        // Facet form: <x, -v_i> <= scale/n for every unit vertex v_i.
        return -dots.minCoeff() <= s.scale / self->dim_ + slack;
      }
      if (x.minCoeff() < -slack) return false;
      return x.sum() <= s.scale + slack;
    }
    bool operator()(const HPolytopeShape& s) const {
      Vec r = s.normals * x - s.offsets;
      return r.maxCoeff() <= detail::membership_slack(s.offsets.maxCoeff());
    }
    bool operator()(const AffineImageShape& s) const {
      return s.inner->contains(s.map.apply_inverse(x));
    }
    bool operator()(const MinkowskiSumShape& s) const {
      const Body& A = *s.a;
      const Body& B = *s.b;
      // Fast path: one summand is a centered ball -> distance test.
      if (auto rb = as_ball_radius(B); rb && A.has_nearest_point()) {
        double d = (x - A.nearest_point(x)).norm();
        return d <= *rb + detail::membership_slack(*rb);
      }
      if (auto ra = as_ball_radius(A); ra && B.has_nearest_point()) {
        double d = (x - B.nearest_point(x)).norm();
        return d <= *ra + detail::membership_slack(*ra);
      }
      // General case: alternating projections minimize ||x - a - b|| over
      // a in A, b in B; membership declared at tolerance 1e-7 * scale.
      if (A.has_nearest_point() && B.has_nearest_point()) {
        double scale = A.bounding_radius() + B.bounding_radius() + x.norm();
        Vec b = Vec::Zero(x.size());
        Vec a = A.nearest_point(x);
        double resid = (x - a - b).norm();
        for (int it = 0; it < 200; ++it) {
          b = B.nearest_point(x - a);
          a = A.nearest_point(x - b);
          double r2 = (x - a - b).norm();
          bool stalled = resid - r2 < 1e-12 * scale;
          resid = r2;
          if (stalled || resid <= 1e-9 * scale) break;
        }
        return resid <= 1e-7 * scale;
      }
      throw OracleUnavailableError(
          "minkowski_sum membership requires a Euclidean-ball summand or "
          "nearest-point oracles on both summands (body: " + self->label() +
          ")");
    }
    bool operator()(const OracleShape& s) const { return s.member(x); }
  };
  return std::visit(V{this, x}, shape_);
}

// --- support ---------------------------------------------------------------

inline double Body::support_homogeneous(const Vec& y) const {
  require(y.size() == dim_, "support: dimension mismatch");
  if (y.norm() == 0.0) return 0.0;
  struct V {
    const Body* self;
    const Vec& y;
    double operator()(const EuclideanBall& s) const {
      return s.radius * y.norm();
    }
    double operator()(const CubeShape& s) const {
      return 0.5 * s.side * y.lpNorm<1>();
    }
    double operator()(const CrossPolytope& s) const {
      return s.scale * y.cwiseAbs().maxCoeff();
    }
    double operator()(const LpBall& s) const {
      // Dual norm: h(y) = scale * ||y||_{p'}, 1/p + 1/p' = 1.
      if (s.exponent == 1.0) return s.scale * y.cwiseAbs().maxCoeff();
      double pd = s.exponent / (s.exponent - 1.0);
      double acc = 0.0;
      for (int i = 0; i < y.size(); ++i) acc += std::pow(std::abs(y[i]), pd);
      return s.scale * std::pow(acc, 1.0 / pd);
    }
    double operator()(const SimplexShape& s) const {
      if (s.centered) return s.scale * (s.unit_vertices * y).maxCoeff();
      return s.scale * std::max(0.0, y.maxCoeff());
    }
    double operator()(const HPolytopeShape& s) const {
      return detail::lp_max(s.normals, s.offsets, y);
    }
    double operator()(const AffineImageShape& s) const {
      return s.inner->support_homogeneous(s.map.matrix().transpose() * y) +
             s.map.translation().dot(y);
    }
    double operator()(const MinkowskiSumShape& s) const {
      return s.a->support_homogeneous(y) + s.b->support_homogeneous(y);
    }
    double operator()(const OracleShape&) const {
      throw OracleUnavailableError(
          "support unavailable for membership-only body " + self->label());
    }
  };
  return std::visit(V{this, y}, shape_);
}

inline double Body::support(const Vec& direction) const {
  double n = direction.norm();
  require(std::abs(n - 1.0) <= 1e-9,
          "support: direction must be unit length (|norm - 1| = " +
              format_double(std::abs(n - 1.0)) + "); normalize the input");
  return support_homogeneous(direction);
}

// --- gauge -----------------------------------------------------------------

inline double gauge_by_bisection(const Body& b, const Vec& x, double rel_tol) {
  double nx = x.norm();
  if (nx == 0.0) return 0.0;
  require(b.contains(Vec::Zero(b.dim())),
          "gauge: origin must lie in the body (" + b.label() + ")");
  double R = b.bounding_radius();
  double lo = nx / R;  // gauge >= ||x|| / R always
  if (b.contains(x / lo)) return lo;
  double hi = lo;
  int guard = 0;
  while (!b.contains(x / (hi *= 2.0))) {
    if (++guard > 80)
      throw GeometryError("gauge: bisection failed to bracket (" + b.label() +
                          ")");
  }
  // Invariant: x/lo outside, x/hi inside.
  while ((hi - lo) / hi > rel_tol) {
    double mid = 0.5 * (lo + hi);
    (b.contains(x / mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double Body::gauge(const Vec& x) const {
  require(x.size() == dim_, "gauge: dimension mismatch");
  double nx = x.norm();
  if (nx == 0.0) return 0.0;
  struct V {
    const Body* self;
    const Vec& x;
    double operator()(const EuclideanBall& s) const {
      return x.norm() / s.radius;
    }
    double operator()(const CubeShape& s) const {
      return x.cwiseAbs().maxCoeff() / (0.5 * s.side);
    }
    double operator()(const CrossPolytope& s) const {
      return x.lpNorm<1>() / s.scale;
    }
    double operator()(const LpBall& s) const {
      double acc = 0.0;
      double m = x.cwiseAbs().maxCoeff();
      for (int i = 0; i < x.size(); ++i)
        acc += std::pow(std::abs(x[i]) / m, s.exponent);
      return m * std::pow(acc, 1.0 / s.exponent) / s.scale;
    }
    double operator()(const SimplexShape& s) const {
      if (s.centered) {
        // Polytope gauge: max_i <a_i, x> / b_i over facets.
        Vec dots = -(s.unit_vertices * x);
        return dots.maxCoeff() * self->dim_ / s.scale;
      }
      throw GeometryError(
          "gauge: corner simplex does not contain the origin in its "
          "interior; center it first");
    }
    double operator()(const HPolytopeShape& s) const {
      return (s.normals * x).cwiseQuotient(s.offsets).maxCoeff();
    }
    double operator()(const AffineImageShape& s) const {
      if (s.map.translation().norm() <= 1e-14)
        return s.inner->gauge(s.map.apply_inverse(x));
      return gauge_by_bisection(*self, x, 1e-8);
    }
    double operator()(const MinkowskiSumShape&) const {
      return gauge_by_bisection(*self, x, 1e-8);
    }
    double operator()(const OracleShape&) const {
      return gauge_by_bisection(*self, x, 1e-8);
    }
  };
  return std::visit(V{this, x}, shape_);
}

// --- bounding radius -------------------------------------------------------

inline double Body::bounding_radius() const {
  struct V {
    const Body* self;
    double operator()(const EuclideanBall& s) const { return s.radius; }
    double operator()(const CubeShape& s) const {
      return 0.5 * s.side * std::sqrt(double(self->dim_));
    }
    double operator()(const CrossPolytope& s) const { return s.scale; }
    double operator()(const LpBall& s) const {
      // max ||x||_2 over the l_p ball: 1 for p <= 2, n^{1/2-1/p} for p > 2.
      if (s.exponent <= 2.0) return s.scale;
      return s.scale *
             std::pow(double(self->dim_), 0.5 - 1.0 / s.exponent);
    }
    double operator()(const SimplexShape& s) const { return s.scale; }
    double operator()(const HPolytopeShape& s) const {
      // Circumradius of the axis-aligned bounding box (upper bound).
      int n = self->dim_;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e[i] = 1.0;
        double hi = detail::lp_max(s.normals, s.offsets, e);
        double lo = detail::lp_max(s.normals, s.offsets, Vec(-e));
        double m = std::max(hi, lo);
        acc += m * m;
      }
      return std::sqrt(acc);
    }
    double operator()(const AffineImageShape& s) const {
      return s.map.operator_norm() * s.inner->bounding_radius() +
             s.map.translation().norm();
    }
    double operator()(const MinkowskiSumShape& s) const {
      return s.a->bounding_radius() + s.b->bounding_radius();
    }
    double operator()(const OracleShape& s) const { return s.bounding_radius; }
  };
  return std::visit(V{this}, shape_);
}

// --- volume ----------------------------------------------------------------

inline std::optional<double> Body::exact_volume() const {
  struct V {
    const Body* self;
    std::optional<double> operator()(const EuclideanBall& s) const {
      return unit_ball_volume(self->dim_) * std::pow(s.radius, self->dim_);
    }
    std::optional<double> operator()(const CubeShape& s) const {
      return std::pow(s.side, self->dim_);
    }
    std::optional<double> operator()(const CrossPolytope& s) const {
      int n = self->dim_;
      return std::exp(n * std::log(2.0 * s.scale) - std::lgamma(n + 1.0));
    }
    std::optional<double> operator()(const LpBall& s) const {
      int n = self->dim_;
      double p = s.exponent;
      double logv = n * (std::log(2.0) + std::lgamma(1.0 + 1.0 / p)) -
                    std::lgamma(1.0 + n / p) + n * std::log(s.scale);
      return std::exp(logv);
    }
    std::optional<double> operator()(const SimplexShape& s) const {
      int n = self->dim_;
      if (s.centered)
        return detail::regular_simplex_volume(n) * std::pow(s.scale, n);
      return std::exp(n * std::log(s.scale) - std::lgamma(n + 1.0));
    }
    std::optional<double> operator()(const HPolytopeShape&) const {
      return std::nullopt;
    }
    std::optional<double> operator()(const AffineImageShape& s) const {
      auto v = s.inner->exact_volume();
      if (!v) return std::nullopt;
      return *v * s.map.det_abs();
    }
    std::optional<double> operator()(const MinkowskiSumShape& s) const {
      int n = self->dim_;
      auto ra = as_ball_radius(*s.a);
      auto rb = as_ball_radius(*s.b);
      if (ra && rb)
        return unit_ball_volume(n) * std::pow(*ra + *rb, n);
      // Steiner formula for cube + ball: sum_k C(n,k) side^{n-k} w_k r^k.
      const Body* cube_part = nullptr;
      std::optional<double> r;
      if (const auto* c = std::get_if<CubeShape>(&s.a->shape()); c && rb) {
        cube_part = s.a.get();
        r = rb;
      } else if (const auto* c2 = std::get_if<CubeShape>(&s.b->shape());
                 c2 && ra) {
        cube_part = s.b.get();
        r = ra;
      }
      if (cube_part && r) {
        double side = std::get<CubeShape>(cube_part->shape()).side;
        double total = 0.0;
        for (int k = 0; k <= n; ++k) {
          double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                                  std::lgamma(n - k + 1.0));
          double wk = k == 0 ? 1.0 : unit_ball_volume(k);
          total += binom * std::pow(side, n - k) * wk * std::pow(*r, k);
        }
        return total;
      }
      return std::nullopt;
    }
    std::optional<double> operator()(const OracleShape& s) const {
      return s.volume;
    }
  };
  return std::visit(V{this}, shape_);
}

// --- exact sampler availability -------------------------------------------

inline bool Body::has_exact_sampler() const {
  struct V {
    bool operator()(const EuclideanBall&) const { return true; }
    bool operator()(const CubeShape&) const { return true; }
    bool operator()(const CrossPolytope&) const { return true; }
    bool operator()(const LpBall&) const { return true; }
    bool operator()(const SimplexShape&) const { return true; }
    bool operator()(const HPolytopeShape&) const { return false; }
    bool operator()(const AffineImageShape& s) const {
      return s.inner->has_exact_sampler();
    }
    bool operator()(const MinkowskiSumShape&) const { return false; }
    bool operator()(const OracleShape&) const { return false; }
  };
  return std::visit(V{}, shape_);
}

// --- homothety and affine images ------------------------------------------

inline Body scale_body(const Body& b, double lambda) {
  require(lambda > 0.0, "scale_body: scale must be positive");
  struct V {
    const Body* self;
    double lambda;
    Body operator()(const EuclideanBall& s) const {
      return Body::ball(self->dim(), s.radius * lambda);
    }
    Body operator()(const CubeShape& s) const {
      return Body::cube(self->dim(), s.side * lambda);
    }
    Body operator()(const CrossPolytope& s) const {
      return Body::cross_polytope(self->dim(), s.scale * lambda);
    }
    Body operator()(const LpBall& s) const {
      return Body::lp_ball(self->dim(), s.exponent, s.scale * lambda);
    }
    Body operator()(const SimplexShape& s) const {
      return Body::simplex(self->dim(), s.scale * lambda, s.centered);
    }
    Body operator()(const HPolytopeShape& s) const {
      return Body::h_polytope(s.normals, Vec(s.offsets * lambda));
    }
    Body operator()(const AffineImageShape& s) const {
      return Body::affine_image(
          *s.inner, AffineMap::scaling(self->dim(), lambda).compose(s.map));
    }
    Body operator()(const MinkowskiSumShape& s) const {
      return Body::minkowski_sum(scale_body(*s.a, lambda),
                                 scale_body(*s.b, lambda));
    }
    Body operator()(const OracleShape& s) const {
      double l = lambda;
      auto inner_member = s.member;
      std::optional<double> vol;
      if (s.volume) vol = *s.volume * std::pow(l, self->dim());
      return Body::oracle(
          self->dim(),
          [inner_member, l](const Vec& x) { return inner_member(x / l); },
          s.bounding_radius * l, vol, s.provenance);
    }
  };
  Body out = std::visit(V{&b, lambda}, b.shape());
  out.label_ = b.label_;
  out.flags_ = b.flags_;
  return out;
}

inline Body apply_affine(const Body& b, const AffineMap& map) {
  require(b.dim() == map.dim(), "apply_affine: dimension mismatch");
  // Pure positive scaling stays in the catalog.
  bool is_scaling =
      map.translation().norm() <= 1e-14 &&
      (map.matrix() - map.matrix()(0, 0) * Mat::Identity(b.dim(), b.dim()))
              .cwiseAbs()
              .maxCoeff() <= 1e-14 &&
      map.matrix()(0, 0) > 0.0;
  if (is_scaling) return scale_body(b, map.matrix()(0, 0));
  if (const auto* s = std::get_if<MinkowskiSumShape>(&b.shape())) {
    // T(A + B) + t = (T(A) + t) + T(B).
    AffineMap linear(map.matrix(), Vec::Zero(b.dim()));
    return Body::minkowski_sum(apply_affine(*s->a, map),
                               apply_affine(*s->b, linear));
  }
  return Body::affine_image(b, map);
}

}  // namespace slicelab

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "slicelab/body.hpp"
#include "slicelab/body_json.hpp"
#include "slicelab/rng.hpp"

using namespace slicelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("cube membership, gauge, support and volume") {
  Body c = Body::cube(3);
  Vec in(3), out(3);
  in << 0.2, -0.3, 0.1;
  out << 0.51, 0.0, 0.0;
  CHECK(c.contains(in));
  CHECK_FALSE(c.contains(out));
  CHECK_THAT(c.gauge(in), WithinAbs(0.6, 1e-12));  // max |x_i| / (1/2)
  Vec d(3);
  d << 1.0, 1.0, 1.0;
  d.normalize();
  CHECK_THAT(c.support(d), WithinAbs(0.5 * std::sqrt(3.0), 1e-12));
  CHECK_THAT(*c.exact_volume(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(c.bounding_radius(), WithinAbs(std::sqrt(3.0) / 2.0, 1e-12));
  CHECK(c.is_volume_normalized());

  Body c2 = Body::cube(2, 3.0);
  CHECK_THAT(*c2.exact_volume(), WithinAbs(9.0, 1e-12));
}

TEST_CASE("ball closed forms") {
  double r = volume_one_ball_radius(2);
  CHECK_THAT(r, WithinAbs(1.0 / std::sqrt(pi), 1e-12));
  CHECK_THAT(volume_one_ball_radius(3), WithinRel(oracles::volume_one_ball_radius(3), 1e-12));
  Body b = Body::ball(3, 2.0);
  CHECK_THAT(*b.exact_volume(), WithinAbs(4.0 / 3.0 * pi * 8.0, 1e-9));
  Vec d(3);
  d << 0.0, -1.0, 0.0;
  CHECK_THAT(b.support(d), WithinAbs(2.0, 1e-12));
  Vec x(3);
  x << 1.0, 1.0, 1.0;
  CHECK_THAT(b.gauge(x), WithinAbs(std::sqrt(3.0) / 2.0, 1e-12));
}

TEST_CASE("cross-polytope gauge is the scaled l1 norm") {
  Body cr = Body::cross_polytope(3, 2.0);
  Vec x(3);
  x << 0.5, -0.5, 0.5;
  CHECK_THAT(cr.gauge(x), WithinAbs(1.5 / 2.0, 1e-12));
  CHECK(cr.contains(x));
  // volume of the l1 ball of scale s: (2s)^n / n!
  CHECK_THAT(*cr.exact_volume(), WithinAbs(64.0 / 6.0, 1e-9));
  Vec d(3);
  d << 0.6, -0.8, 0.0;
  CHECK_THAT(cr.support(d), WithinAbs(2.0 * 0.8, 1e-12));
}

TEST_CASE("lp ball gauge is the scaled lp norm") {
  Body b = Body::lp_ball(2, 3.0, 1.5);
  Vec x(2);
  x << 0.9, -1.2;
  double lp = std::pow(std::pow(0.9, 3.0) + std::pow(1.2, 3.0), 1.0 / 3.0);
  CHECK_THAT(b.gauge(x), WithinAbs(lp / 1.5, 1e-12));
}

TEST_CASE("centered simplex: volume, circumradius, support") {
  // Unit-circumradius regular simplex volume is (n+1)^{(n+1)/2} / (n! n^{n/2});
  // the scale multiplies the circumradius and enters the volume to the n-th
  // power.
  double unit_vol = std::pow(5.0, 2.5) / (24.0 * 16.0);
  Body s0 = Body::simplex(4);
  CHECK_THAT(*s0.exact_volume(), WithinAbs(unit_vol, 1e-9));
  CHECK_THAT(s0.bounding_radius(), WithinAbs(1.0, 1e-9));
  double scale = std::pow(1.0 / unit_vol, 0.25);
  Body s = Body::simplex(4, scale);
  CHECK_THAT(*s.exact_volume(), WithinAbs(1.0, 1e-9));
  CHECK_THAT(s.bounding_radius(), WithinAbs(scale, 1e-9));
  // support in direction e_1 is the largest first coordinate of a vertex.
  Vec d = Vec::Zero(4);
  d[0] = 1.0;
  double h = s.support(d);
  CHECK(h > 0.0);
  CHECK(h <= s.bounding_radius() + 1e-12);
  // corner simplex variant: conv{0, s e_i}, volume s^n / n!.
  Body corner = Body::simplex(3, 2.0, false);
  CHECK_THAT(*corner.exact_volume(), WithinAbs(8.0 / 6.0, 1e-9));
  Vec y(3);
  y << 0.4, 0.4, 0.4;
  CHECK(corner.contains(y));
  y << 0.8, 0.8, 0.8;
  CHECK_FALSE(corner.contains(y));
}

TEST_CASE("h-polytope agrees with the cube it encodes") {
  Mat N(6, 3);
  Vec b(6);
  N << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  b << .5, .5, .5, .5, .5, .5;
  Body hp = Body::h_polytope(N, b);
  Body c = Body::cube(3);
  RngStream rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    Vec x = rng.gaussian_vec(3) * 0.4;
    CHECK(hp.contains(x) == c.contains(x));
  }
  for (int i = 0; i < 50; ++i) {
    Vec d = rng.unit_vec(3);
    CHECK_THAT(hp.support(d), WithinAbs(c.support(d), 1e-9));
  }
}

TEST_CASE("minkowski sum: membership, support additivity, planar volume") {
  Body box = Body::cube(2, 1.0);
  Body disk = Body::ball(2, 0.5);
  Body mk = Body::minkowski_sum(box, disk);
  Vec y(2);
  y << 0.9, 0.0;
  CHECK(mk.contains(y));
  y << 1.01, 0.0;
  CHECK_FALSE(mk.contains(y));
  RngStream rng(6, 0);
  for (int i = 0; i < 50; ++i) {
    Vec d = rng.unit_vec(2);
    CHECK_THAT(mk.support(d), WithinAbs(box.support(d) + disk.support(d), 1e-9));
  }
  // planar Steiner formula: |A + rB| = |A| + r per(A) + r^2 pi.
  CHECK_THAT(*mk.exact_volume(), WithinAbs(1.0 + 4.0 * 0.5 + pi * 0.25, 1e-9));
}

TEST_CASE("scaling and affine images track volume and support") {
  Body c = Body::cube(2);
  Body sc = scale_body(c, 2.0);
  CHECK_THAT(*sc.exact_volume(), WithinAbs(4.0, 1e-12));
  Mat A(2, 2);
  A << 2.0, 1.0, 0.0, 0.5;
  Body im = apply_affine(c, AffineMap(A, Vec::Zero(2)));
  CHECK_THAT(*im.exact_volume(), WithinAbs(1.0, 1e-12));  // det = 1
  RngStream rng(8, 0);
  for (int i = 0; i < 50; ++i) {
    Vec d = rng.unit_vec(2);
    // h_{AK}(d) = h_K(A^T d), extended 1-homogeneously since the support
    // interface takes unit directions only
    Vec ad = A.transpose() * d;
    CHECK_THAT(im.support(d),
               WithinAbs(ad.norm() * c.support(ad.normalized()), 1e-9));
  }
}

TEST_CASE("support scales with the body, gauge matches membership") {
  Body bodies[] = {Body::cube(3), Body::ball(3, 0.8),
                   Body::cross_polytope(3, 1.2), Body::simplex(3)};
  RngStream rng(9, 0);
  for (const Body& b : bodies) {
    for (int i = 0; i < 40; ++i) {
      Vec d = rng.unit_vec(3);
      // h_{3K}(d) = 3 h_K(d) (the support interface takes unit directions)
      CHECK_THAT(scale_body(b, 3.0).support(d), WithinAbs(3.0 * b.support(d), 1e-9));
      Vec x = 0.9 * rng.gaussian_vec(3);
      bool inside = b.contains(x);
      double g = b.gauge(x);
      if (g < 1.0 - 1e-9) CHECK(inside);
      if (g > 1.0 + 1e-9) CHECK_FALSE(inside);
    }
  }
}

TEST_CASE("membership-only oracles refuse support and exact sampling") {
  Body orc = Body::oracle(
      2, [](const Vec& x) { return x.norm() <= 1.0; }, 1.0);
  Vec d(2);
  d << 1.0, 0.0;
  CHECK_THROWS_AS(orc.support(d), OracleUnavailableError);
  CHECK_FALSE(orc.has_exact_sampler());
  CHECK(orc.contains(0.5 * d));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(Body::cube(0), Error);
  CHECK_THROWS_AS(Body::ball(2, -1.0), Error);
  CHECK_THROWS_AS(Body::lp_ball(2, 0.5), Error);
  Mat N(1, 2);
  N << 1, 0;
  Vec b(2);
  b << 1, 1;
  CHECK_THROWS_AS(Body::h_polytope(N, b), Error);
}

TEST_CASE("json round trip preserves geometry") {
  Body bodies[] = {Body::cube(3, 2.0),
                   Body::ball(2, 0.7),
                   Body::cross_polytope(4, 1.1),
                   Body::lp_ball(2, 3.0, 1.2),
                   Body::simplex(3),
                   Body::h_polytope(
                       [] {
                         Mat N(4, 2);
                         N << 1, 0, -1, 0, 0, 1, 0, -1;
                         return N;
                       }(),
                       Vec::Constant(4, 0.5)),
                   scale_body(Body::minkowski_sum(Body::cube(2), Body::ball(2, 0.3)), 0.9)};
  RngStream rng(11, 0);
  for (const Body& b : bodies) {
    json j = body_to_json(b);
    Body back = body_from_json(j);
    REQUIRE(back.dim() == b.dim());
    for (int i = 0; i < 100; ++i) {
      Vec x = rng.gaussian_vec(b.dim());
      CHECK(back.contains(x) == b.contains(x));
    }
    if (auto v = b.exact_volume())
      CHECK_THAT(*back.exact_volume(), WithinAbs(*v, 1e-9));
  }
}

TEST_CASE("json rejects malformed shapes") {
  CHECK_THROWS_AS(body_from_json(json{{"shape", "dodecahedron"}, {"n", 3}}),
                  ConfigError);
  CHECK_THROWS_AS(body_from_json(json{{"shape", "ball"}}), ConfigError);
  CHECK_THROWS_AS(body_from_json(json{{"shape", "ball"}, {"n", 2}, {"radius", -1.0}}),
                  Error);
}

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "slicelab/isotropy.hpp"
#include "slicelab/sampling.hpp"

using namespace slicelab;
using Catch::Matchers::WithinAbs;

TEST_CASE("cube sampler matches product-uniform moments") {
  Body c = Body::cube(3);
  PointSample s = sample_uniform(c, 200000, 21);
  REQUIRE(s.exact);
  Vec mean = s.points.colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 0.003);
  Mat cov = covariance(s, Vec::Zero(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK_THAT(cov(i, j), WithinAbs(i == j ? 1.0 / 12.0 : 0.0, 0.002));
  bool all_in = true;
  for (std::int64_t i = 0; i < s.count(); ++i)
    if (!c.contains(s.point(i))) all_in = false;
  CHECK(all_in);
}

TEST_CASE("ball sampler matches radial power-law moments") {
  const int n = 4;
  double r = 1.3;
  Body b = Body::ball(n, r);
  PointSample s = sample_uniform(b, 200000, 22);
  double snorm = 0.0, s2 = 0.0;
  for (std::int64_t i = 0; i < s.count(); ++i) {
    snorm += s.point(i).norm();
    s2 += s.point(i)[0] * s.point(i)[0];
  }
  // E|x| = r n/(n+1), E x_1^2 = r^2/(n+2)
  CHECK_THAT(snorm / s.count(), WithinAbs(r * n / double(n + 1), 0.002));
  CHECK_THAT(s2 / s.count(), WithinAbs(r * r / double(n + 2), 0.003));
  // quadrature oracle for a fractional marginal moment
  double sm = 0.0;
  for (std::int64_t i = 0; i < s.count(); ++i)
    sm += std::pow(std::abs(s.point(i)[0]) / r, 1.5);
  CHECK_THAT(sm / s.count(),
             WithinAbs(oracles::ball_abs_marginal_moment(n, 1.5), 0.002));
}

TEST_CASE("cross-polytope sampler matches l1 gauge moments") {
  const int n = 3;
  double scale = 1.4;
  Body cr = Body::cross_polytope(n, scale);
  PointSample s = sample_uniform(cr, 200000, 23);
  REQUIRE(s.exact);
  double sg = 0.0, s2 = 0.0;
  for (std::int64_t i = 0; i < s.count(); ++i) {
    sg += s.point(i).cwiseAbs().sum() / scale;  // gauge of the point
    s2 += s.point(i)[0] * s.point(i)[0];
  }
  // gauge of a uniform point has density n t^{n-1}: mean n/(n+1).
  CHECK_THAT(sg / s.count(), WithinAbs(n / double(n + 1), 0.002));
  // E x_1^2 = 2 scale^2 / ((n+1)(n+2))
  CHECK_THAT(s2 / s.count(),
             WithinAbs(2.0 * scale * scale / ((n + 1.0) * (n + 2.0)), 0.002));
}

TEST_CASE("centered simplex sampler is centered and isotropic") {
  Body sx = Body::simplex(3);
  PointSample s = sample_uniform(sx, 200000, 24);
  REQUIRE(s.exact);
  Vec mean = s.points.colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 0.003);
  Mat cov = covariance(s, Vec::Zero(3));
  double diag = cov.diagonal().mean();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK_THAT(cov(i, j), WithinAbs(i == j ? diag : 0.0, 0.002));
  bool all_in = true;
  for (std::int64_t i = 0; i < s.count(); ++i)
    if (!sx.contains(s.point(i))) all_in = false;
  CHECK(all_in);
}

TEST_CASE("exact samples index by (seed, i): prefixes agree, seeds differ") {
  Body c = Body::cube(2);
  PointSample big = sample_uniform(c, 1000, 77);
  PointSample small = sample_uniform(c, 400, 77);
  CHECK(big.points.topRows(400) == small.points);
  PointSample other = sample_uniform(c, 400, 78);
  CHECK(big.points.topRows(400) != other.points);
}

TEST_CASE("hit-and-run on an h-polytope reproduces cube moments") {
  Mat N(4, 2);
  Vec b(4);
  N << 1, 0, -1, 0, 0, 1, 0, -1;
  b << .5, .5, .5, .5;
  Body hp = Body::h_polytope(N, b);
  PointSample s = sample_uniform(hp, 30000, 31);
  REQUIRE_FALSE(s.exact);
  CHECK(s.burn_in > 0);
  CHECK(s.thinning > 0);
  Mat cov = covariance(s, Vec::Zero(2));
  CHECK_THAT(cov(0, 0), WithinAbs(1.0 / 12.0, 0.004));
  CHECK_THAT(cov(1, 1), WithinAbs(1.0 / 12.0, 0.004));
  CHECK_THAT(cov(0, 1), WithinAbs(0.0, 0.003));
  // determinism of the walk
  PointSample s2 = sample_uniform(hp, 30000, 31);
  CHECK(s.points == s2.points);
}

TEST_CASE("walks refuse to start outside the body") {
  // Shifted box whose interior misses the origin.
  Mat N(4, 2);
  Vec b(4);
  N << 1, 0, -1, 0, 0, 1, 0, -1;
  b << 3.0, -2.0, 0.5, 0.5;
  CHECK_THROWS_AS(Body::h_polytope(N, b), Error);
  Body orc = Body::oracle(
      2, [](const Vec& x) { return (x - 3.0 * Vec::Ones(2)).norm() <= 1.0; },
      4.5);
  CHECK_THROWS_AS(sample_uniform(orc, 100, 1), GeometryError);
}

TEST_CASE("volume estimation: closed forms short-circuit, MC agrees") {
  VolumeEstimate ve = estimate_volume(Body::cube(3));
  CHECK(ve.exact);
  CHECK_THAT(ve.value, WithinAbs(1.0, 1e-12));
  // Membership-only disk: MC vs pi r^2.
  Body orc = Body::oracle(
      2, [](const Vec& x) { return x.norm() <= 0.8; }, 0.8);
  CHECK_THROWS_AS(estimate_volume(orc), InsufficientBudgetError);
  VolumeEstimate mc = estimate_volume(orc, 200000, 3);
  CHECK_FALSE(mc.exact);
  CHECK_THAT(mc.value, WithinAbs(pi * 0.64, 0.01));
  CHECK(mc.std_error > 0.0);
  CHECK(std::abs(mc.value - pi * 0.64) < 4.0 * mc.std_error + 0.005);
}

TEST_CASE("volume normalization yields a volume-one homothet") {
  Body b = Body::ball(3, 2.0);
  Body nb = volume_normalize(b);
  CHECK(nb.is_volume_normalized(1e-9));
  CHECK_THAT(nb.bounding_radius(), WithinAbs(volume_one_ball_radius(3), 1e-9));
}

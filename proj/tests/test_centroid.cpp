#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "slicelab/centroid.hpp"
#include "slicelab/moments.hpp"

using namespace slicelab;
using Catch::Matchers::WithinAbs;

TEST_CASE("cube moment support along a coordinate axis") {
  Body cube3 = Body::cube(3);
  PointSample s = sample_uniform(cube3, 200000, 11);
  Vec e1 = Vec::Zero(3);
  e1[0] = 1.0;
  for (double q : {1.0, 2.0, 4.0, 10.0}) {
    CAPTURE(q);
    // (E |x_1|^q)^{1/q} = (2^{-q}/(q+1))^{1/q} on the unit cube.
    double want = std::pow(std::pow(2.0, -q) / (q + 1.0), 1.0 / q);
    Estimate h = zq_support_from_sample(s, q, e1);
    CHECK(std::abs(h.value - want) < 5e-3 * want + 4.0 * h.std_error);
  }
}

TEST_CASE("moment support is positively homogeneous in the direction") {
  Body cube3 = Body::cube(3);
  PointSample s = sample_uniform(cube3, 50000, 12);
  Vec e1 = Vec::Zero(3);
  e1[0] = 1.0;
  Estimate h1 = zq_support_from_sample(s, 2.0, e1);
  Estimate h3 = zq_support_from_sample(s, 2.0, 3.0 * e1);
  CHECK_THAT(h3.value / h1.value, WithinAbs(3.0, 1e-12));
}

TEST_CASE("large-exponent log-space path joins the direct path continuously") {
  Body cube3 = Body::cube(3);
  PointSample s = sample_uniform(cube3, 100000, 13);
  Vec e1 = Vec::Zero(3);
  e1[0] = 1.0;
  Estimate a = zq_support_from_sample(s, 100.0, e1);
  Estimate b = zq_support_from_sample(s, 100.5, e1);
  CHECK_THAT(b.value / a.value, WithinAbs(1.0, 0.01));
}

TEST_CASE("second-moment body of the disk is the ball of radius L") {
  double r2 = volume_one_ball_radius(2);
  double L2 = r2 / 2.0;  // r / sqrt(n+2)
  Body ball2 = Body::ball(2, r2);
  ZqEvaluator ev(ball2, 2.0, 100000, 21);
  Vec d(2);
  d << 0.6, -0.8;
  CHECK_THAT(ev.support(d).value, WithinAbs(L2, 4e-3));
  ZqRadius rad = zq_radius(ev, 64, 22);
  CHECK_THAT(rad.value.value, WithinAbs(L2, 4e-3));
  Estimate w = zq_width(ev, 2.0, 128, 23);
  CHECK_THAT(w.value, WithinAbs(L2, 4e-3));
  Estimate wneg = zq_width(ev, -1.0, 128, 24);
  CHECK_THAT(wneg.value, WithinAbs(L2, 4e-3));
  KstarReport ks = kstar_index(ev, 128, 25);
  CHECK(ks.k == 2);
}

TEST_CASE("fourth-moment radius of the cube sits on the diagonal") {
  Body cube3 = Body::cube(3);
  PointSample s = sample_uniform(cube3, 200000, 31);
  ZqEvaluator ev(cube3, 4.0, s);
  ZqRadius rad = zq_radius(ev, 200, 32);
  // E <x, u>^4 on the diagonal u = (1,1,1)/sqrt(3): expanding (x1+x2+x3)^4
  // keeps 3 pure fourth powers and 18 mixed squares, so the moment is
  // (3 m4 + 18 m2^2)/9 with m2 = 1/12, m4 = 1/80.  The diagonal beats the
  // axis value (1/80)^{1/4}, so the maximizer search should land there.
  double want =
      std::pow((3.0 * (1.0 / 80.0) + 18.0 / 144.0) / 9.0, 0.25);
  CHECK_THAT(rad.value.value, WithinAbs(want, 6e-3));
  // direction is close to a diagonal: all components comparable.
  double align = rad.direction.cwiseAbs().minCoeff() /
                 rad.direction.cwiseAbs().maxCoeff();
  CHECK(align > 0.8);
}

TEST_CASE("moment bodies are nested and grow slowly in the exponent") {
  Body cube3 = Body::cube(3);
  PointSample s = sample_uniform(cube3, 100000, 41);
  Vec e1 = Vec::Zero(3);
  e1[0] = 1.0;
  Estimate h2 = zq_support_from_sample(s, 2.0, e1);
  Estimate h1 = zq_support_from_sample(s, 1.0, e1);
  CHECK_THAT(h2.value / h1.value, WithinAbs(std::sqrt(1.0 / 12.0) * 4.0, 6e-3));
  InclusionReport rep = inclusion_ratio(cube3, 1.0, 2.0, 96, 100000, 42);
  CHECK(rep.max_ratio >= 1.15);
  CHECK(rep.max_ratio <= 1.35);  // well under the q/p = 2 ceiling
  // nesting: h_p <= h_q pointwise, up to shared-sample noise
  DirectionSet dirs = sample_sphere(3, 64, 43);
  for (std::int64_t i = 0; i < dirs.count(); ++i) {
    Estimate lo = zq_support_from_sample(s, 1.0, dirs.direction(i));
    Estimate hi = zq_support_from_sample(s, 2.0, dirs.direction(i));
    CHECK(hi.value >= lo.value * (1.0 - 1e-9));
  }
}

TEST_CASE("width of the moment body matches its direction-average definition") {
  Body cube2 = Body::cube(2);
  PointSample s = sample_uniform(cube2, 100000, 51);
  ZqEvaluator ev(cube2, 2.0, s);
  Estimate w = zq_width(ev, 2.0, 256, 52);
  DirectionSet dirs = sample_sphere(2, 256, 52);
  double acc = 0.0;
  for (std::int64_t i = 0; i < dirs.count(); ++i)
    acc += std::pow(ev.support(dirs.direction(i)).value, 2.0);
  double direct = std::sqrt(acc / dirs.count());
  CHECK_THAT(w.value, WithinAbs(direct, 0.02 * direct));
}

TEST_CASE("flatness indices of the cube keep moment bodies fat") {
  Body cube3 = Body::cube(3);
  QstarReport qs = qstar_index(cube3, 40000, 64, 71);
  CHECK(qs.q_star >= 2.0);
  REQUIRE_FALSE(qs.scan.empty());
  // the q=2 entry of the scan reports a full-rank moment body
  PointSample s = sample_uniform(cube3, 50000, 72);
  ZqEvaluator ev(cube3, 2.0, s);
  KstarReport ks = kstar_index(ev, 128, 73);
  CHECK(ks.k == 3);
}

TEST_CASE("evaluator validates the exponent") {
  Body cube2 = Body::cube(2);
  PointSample s = sample_uniform(cube2, 1000, 81);
  CHECK_THROWS_AS(zq_support_from_sample(s, 0.0, Vec::Ones(2)), Error);
  CHECK_THROWS_AS(zq_support_from_sample(s, -1.0, Vec::Ones(2)), Error);
}

#include <catch2/catch_amalgamated.hpp>

#include "slicelab/isotropy.hpp"
#include "slicelab/lab/catalog.hpp"

using namespace slicelab;
using Catch::Matchers::WithinAbs;

namespace {
// Closed-form isotropic constants for the volume-one catalog shapes.
double l_cube() { return std::sqrt(1.0 / 12.0); }
double l_ball(int n) { return volume_one_ball_radius(n) / std::sqrt(n + 2.0); }
double l_cross(int n) {
  double s = std::pow(std::exp(std::lgamma(n + 1.0)), 1.0 / n) / 2.0;
  return s * std::sqrt(2.0 / ((n + 1.0) * (n + 2.0)));
}
double l_simplex(int n) {
  double nf = std::exp(std::lgamma(n + 1.0));
  return std::pow(nf, 1.0 / n) /
         std::sqrt(std::pow(n + 1.0, (n + 1.0) / n) * (n + 2.0));
}
}  // namespace

TEST_CASE("catalog closed-form constants agree with measurement") {
  struct Row {
    const char* name;
    int n;
    double want;
  } rows[] = {
      {"cube", 2, l_cube()},      {"cube", 3, l_cube()},
      {"ball", 2, l_ball(2)},     {"ball", 3, l_ball(3)},
      {"cross", 2, l_cross(2)},   {"cross", 3, l_cross(3)},
      {"simplex", 2, l_simplex(2)}, {"simplex", 3, l_simplex(3)},
  };
  std::uint64_t seed = 400;
  for (const Row& r : rows) {
    CAPTURE(r.name, r.n);
    Body b = lab::catalog_body(r.name, r.n);
    auto cf = lab::closed_form_l(r.name, r.n);
    REQUIRE(cf.has_value());
    CHECK_THAT(*cf, WithinAbs(r.want, 1e-12));
    IsotropyReport rep = isotropy_report(b, 200000, seed++);
    CHECK(std::abs(rep.L.value - r.want) <
          0.005 * r.want + 4.0 * rep.L.std_error);
    CHECK(rep.defect < 1.05);
    CHECK(rep.center.norm() < 0.01);
  }
}

TEST_CASE("the constant is invariant under volume scaling") {
  Body b1 = Body::ball(2, 1.0);  // volume pi, not normalized
  Estimate l = isotropic_constant(b1, 200000, 41);
  CHECK_THAT(l.value, WithinAbs(l_ball(2), 0.002));
}

TEST_CASE("whitening a stretched cube recovers an isotropic image") {
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 2.0;
  D(1, 1) = 0.5;
  Body st = apply_affine(Body::cube(2), AffineMap(D, Vec::Zero(2)));
  IsotropizeResult iso = isotropic_transform(st, 400000, 45);
  // The recovered map must invert the stretch up to an orthogonal factor.
  Mat TS = iso.map.matrix() * D;
  CHECK((TS.transpose() * TS - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <
        0.02);
  CHECK(std::abs(iso.after.L.value - l_cube()) < 0.015 * l_cube());
  CHECK(iso.after.defect < 1.05);
  CHECK(iso.after.center.norm() < 0.01);
}

TEST_CASE("whitening an already isotropic body is close to the identity") {
  Body c = Body::cube(3);
  IsotropizeResult iso = isotropic_transform(c, 400000, 46);
  Mat dev = iso.map.matrix() - Mat::Identity(3, 3);
  CHECK(dev.cwiseAbs().maxCoeff() < 0.05);
  CHECK(iso.map.translation().norm() < 0.01);
}

TEST_CASE("report rejects degenerate samples") {
  PointSample s;
  s.points = Mat::Zero(5, 2);  // rank-deficient
  CHECK_THROWS_AS(detail::report_from_sample(s, 1), InsufficientBudgetError);
}

TEST_CASE("covariance requires matching center dimension") {
  Body c = Body::cube(2);
  PointSample s = sample_uniform(c, 100, 1);
  CHECK_THROWS_AS(covariance(s, Vec::Zero(3)), Error);
}

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "slicelab/constructions.hpp"

using namespace slicelab;
using Catch::Matchers::WithinAbs;

namespace {
const double kLCube = std::sqrt(1.0 / 12.0);
const double kMeanDistSquare = 0.3825978582;  // E|x| over the unit square

WBodyBudget small_budget() {
  WBodyBudget wb;
  wb.slicing.outer = 6000;
  wb.slicing.inner = 6000;
  wb.slicing.replications = 8;
  wb.inner = 8192;
  wb.fraction = 20000;
  return wb;
}
}  // namespace

TEST_CASE("truncation at a generous threshold keeps the whole body") {
  Body cube2 = Body::cube(2);
  WBody w = build_w_body(cube2, 2.0, std::exp(2.0), small_budget(), 101);
  CHECK_THAT(w.measured_fraction.value, WithinAbs(1.0, 1e-12));
  CHECK(1.0 - w.measured_fraction.value <= std::exp(-2.0));
  K1Result k1 = normalize_k1(w, kLCube, 20000, 102);
  CHECK_THAT(k1.scale, WithinAbs(1.0, 1e-12));
  CHECK(k1.checks.z2_ok);
  CHECK_THAT(k1.checks.z2.ratio_max, WithinAbs(1.0, 0.02));
  CHECK(k1.checks.containment_ok);
  CHECK(k1.checks.second_ok);
  CHECK_THAT(k1.checks.second_moment.value, WithinAbs(2.0 / 12.0, 0.003));
}

TEST_CASE("planar truncation clips the square to a disk of known measure") {
  Body cube2 = Body::cube(2);
  WBody w = build_w_body(cube2, 2.0, 1.2, small_budget(), 111);
  double rho = 1.2 * kMeanDistSquare;
  double want = pi * rho * rho;
  // cross-check the closed form against chord-length quadrature
  CHECK_THAT(oracles::disk_square_area(0.0, 0.0, rho), WithinAbs(want, 1e-9));
  CHECK_THAT(w.measured_fraction.value, WithinAbs(want, 0.015));
  PointSample ws = sample_w_interior(w, 5000, 112);
  bool all_in = true;
  for (std::int64_t i = 0; i < ws.count(); ++i)
    if (!w.body.contains(ws.point(i))) all_in = false;
  CHECK(all_in);

  K1Result k1 = normalize_k1(w, kLCube, 20000, 113);
  // normalized truncation is the volume-one disk: second moment r^2/2
  double r2 = volume_one_ball_radius(2);
  CHECK_THAT(k1.checks.second_moment.value, WithinAbs(r2 * r2 / 2.0, 0.004));
  CHECK(k1.checks.z2_ok);
  CHECK(k1.checks.containment_ok);

  // serialization round trip preserves membership
  json j = body_to_json(k1.k1);
  Body re = rebuild_derived_body(j, "k1");
  bool same = true;
  RngStream rng(991, 0);
  for (int i = 0; i < 200; ++i) {
    Vec x = 0.8 * rng.gaussian_vec(2);
    if (re.contains(x) != k1.k1.contains(x)) same = false;
  }
  CHECK(same);
}

TEST_CASE("radial truncation closed form on the disk") {
  double r = volume_one_ball_radius(2);
  Body ball2 = Body::ball(2, r);
  WBody w = build_w_body(ball2, 3.0, 1.15, small_budget(), 121);
  double m3 = sphere_abs_moment(2, 3.0);
  double c3 = r * std::pow(2.0 / 5.0 * m3, 1.0 / 3.0);
  double i1_exact = c3 * (2.0 / 3.0) * r;
  CHECK_THAT(w.i1_hat.value, WithinAbs(i1_exact, 0.002));
  double frac = std::pow(1.15 * i1_exact / c3 / r, 2.0);
  CHECK_THAT(w.measured_fraction.value, WithinAbs(frac, 0.015));
}

TEST_CASE("threshold diagnostics satisfy their defining identities") {
  TruncationDiagnostics d =
      truncation_diagnostics(8, 2.0, 0.23, 0.29, std::exp(2.0));
  CHECK(d.t0_sq > 0.0);
  CHECK(std::abs(d.p0 * d.t0_sq -
                 4.0 * 64.0 * std::pow(std::log(8.0), 2.0)) < 1e-9);
}

TEST_CASE("support-sum body: exact closed forms and containment") {
  double r2 = volume_one_ball_radius(2);
  Body ball2 = Body::ball(2, r2);
  ConvolutionBody cb = build_convolution_body(ball2, r2 / 2.0, 131);
  CHECK_THAT(cb.gamma, WithinAbs(std::sqrt(2.0), 1e-9));
  Vec d(2);
  d << 1.0, 0.0;
  CHECK_THAT(cb.body.support(d), WithinAbs(r2, 1e-9));

  Body cube2 = Body::cube(2);
  ConvolutionBody cc = build_convolution_body(cube2, kLCube, 132);
  CHECK_THAT(cc.gamma, WithinAbs(std::sqrt(3.0), 1e-9));
  double s = std::sqrt(12.0);
  double steiner = s * s + 4.0 * s * r2 + pi * r2 * r2;
  CHECK_THAT(cc.sum_volume.value, WithinAbs(steiner, 1e-9));

  RngStream rng(133, 0);
  Body scaled = scale_body(cube2, 1.0 / kLCube);
  bool additive = true;
  for (int i = 0; i < 100; ++i) {
    Vec u = rng.unit_vec(2);
    if (std::abs(cb.sum.support(u) -
                 (scale_body(ball2, 2.0 / r2).support(u) + r2)) > 1e-9)
      additive = false;
    if (std::abs(cc.sum.support(u) - (scaled.support(u) + r2)) > 1e-9)
      additive = false;
  }
  CHECK(additive);

  double lo = 1e9, hi = 0.0;
  for (int i = 0; i < 400; ++i) {
    Vec u = rng.unit_vec(2);
    double ratio = cc.body.support(u) / r2;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo >= 0.5);
  CHECK(hi <= 4.0 * std::sqrt(3.0));
}

TEST_CASE("section-normal gauge: closed form, homogeneity, invariance") {
  Body cube2 = Body::cube(2);
  Mat basis(2, 1);
  basis << 1.0, 0.0;
  BallBodyEvaluator ev(cube2, basis, 1.0, 200000, 141);
  Vec phi(2);
  phi << 1.0, 0.0;
  Estimate g = ball_body_gauge(ev, phi);
  CHECK_THAT(g.value, WithinAbs(std::sqrt(8.0), 0.03));
  Estimate g2 = ball_body_gauge(ev, Vec(2.0 * phi));
  CHECK_THAT(g2.value / g.value, WithinAbs(2.0, 1e-9));

  Body ball3 = Body::ball(3, volume_one_ball_radius(3));
  Mat basis2(3, 2);
  basis2 << 1, 0, 0, 1, 0, 0;
  BallBodyEvaluator ev2(ball3, basis2, 2.0, 100000, 142);
  RngStream rng(143, 0);
  double mn = 1e18, mx = 0.0;
  for (int i = 0; i < 16; ++i) {
    Vec c = rng.unit_vec(2);
    double v = ev2.gauge_coords(c).value;
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK_THAT(mx / mn, WithinAbs(1.0, 0.03));
}

TEST_CASE("section-ratio report on cube slabs") {
  Body cube2 = Body::cube(2);
  Mat basis(2, 1), perp(2, 1);
  basis << 1.0, 0.0;
  perp << 0.0, 1.0;
  KbBudget kb;
  KbReport rep = kb_ratio_report(cube2, basis, perp, 1.0, kLCube, kb, 151);
  CHECK(rep.section_exact);
  CHECK_THAT(rep.kb1_ratio, WithinAbs(1.0, 0.02));
  CHECK_THAT(rep.kb2_min, WithinAbs(1.0, 0.03));
  CHECK_THAT(rep.kb2_max, WithinAbs(1.0, 0.03));

  Body cube3 = Body::cube(3);
  Mat basis3(3, 2), perp3(3, 1);
  basis3 << 1, 0, 0, 1, 0, 0;
  perp3 << 0, 0, 1;
  KbBudget kb3;
  kb3.parent_sample = 30000;
  kb3.body_sample = 4000;
  KbReport rep3 = kb_ratio_report(cube3, basis3, perp3, 2.0, kLCube, kb3, 152);
  CHECK(rep3.kb1_ratio > 1.0 / 8.0);
  CHECK(rep3.kb1_ratio < 8.0);
  CHECK(rep3.kb2_min > 1.0 / 8.0);
  CHECK(rep3.kb2_max < 8.0);
  CHECK_THAT(rep3.l_b, WithinAbs(0.30, 0.05));
}

TEST_CASE("coordinate-maximum moment audit on the square") {
  Body cube2 = Body::cube(2);
  PointSample s = sample_uniform(cube2, 200000, 161);
  Mat zs = Mat::Identity(2, 2);
  MaxMomentAudit a = max_moment_audit(s, zs, 2.0, 3.0 * std::exp(3.0));
  CHECK_THAT(a.lhs.value, WithinAbs(std::sqrt(1.0 / 8.0), 0.003));
  CHECK(a.ok);
  CHECK(a.margin > 5.0);
}

TEST_CASE("rotation-averaged functional against its direction-free closed form") {
  Body cube2 = Body::cube(2);
  RotationAverageResult r =
      rotation_average(cube2, 2.0, 64, 4000, 4000, 171, kLCube);
  // q=2 is rotation invariant: mean equals E|x| * L exactly.
  CHECK_THAT(r.mean_pow.value, WithinAbs(kMeanDistSquare * kLCube, 0.003));
  CHECK_THAT(r.c_nq, WithinAbs(std::sqrt(0.5), 1e-12));
  CHECK_THAT(r.c_nq, WithinAbs(std::pow(oracles::sphere_abs_moment(2, 2.0), 0.5),
                               1e-10));
  CHECK(r.ok);
  RotationAverageResult r4 =
      rotation_average(cube2, 4.0, 64, 4000, 4000, 172, kLCube);
  CHECK(r4.ok);
  CHECK_THROWS_AS(rotation_average(cube2, 2.0, 16, 1000, 1000, 173, kLCube),
                  Error);
}

TEST_CASE("sandwich comparison of a body against itself is flat") {
  Body cube2 = Body::cube(2);
  PointSample a = sample_uniform(cube2, 30000, 181);
  PointSample b = sample_uniform(cube2, 30000, 182);
  SandwichReport sw = support_sandwich(a, b, 2.0, 128, 183);
  CHECK(sw.ratio_min > 1.0 - 5.0 * sw.tol_min - 0.02);
  CHECK(sw.ratio_max < 1.0 + 5.0 * sw.tol_max + 0.02);
}

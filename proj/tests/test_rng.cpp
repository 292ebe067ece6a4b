#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "slicelab/rng.hpp"
#include "slicelab/sampling.hpp"

using namespace slicelab;

TEST_CASE("substream keys are deterministic and tag-sensitive") {
  CHECK(substream(7, "alpha", 3) == substream(7, "alpha", 3));
  CHECK(substream(7, "alpha", 3) != substream(7, "alpha", 4));
  CHECK(substream(7, "alpha", 3) != substream(7, "beta", 3));
  CHECK(substream(7, "alpha", 3) != substream(8, "alpha", 3));
  // A family of related keys should not collide.
  std::set<std::uint64_t> seen;
  for (int s = 0; s < 8; ++s)
    for (int i = 0; i < 64; ++i) {
      seen.insert(substream(s, "tag-a", i));
      seen.insert(substream(s, "tag-b", i));
    }
  CHECK(seen.size() == 2u * 8u * 64u);
}

TEST_CASE("streams replay exactly and separate by id") {
  RngStream a(123, 5), b(123, 5), c(123, 6);
  bool same = true, differ = false;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t va = a.next_u64();
    if (va != b.next_u64()) same = false;
    if (va != c.next_u64()) differ = true;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("uniform, gaussian, exponential and gamma variates have the right moments") {
  RngStream rng(2024, 1);
  const int N = 200000;
  double su = 0, su2 = 0, sg = 0, sg2 = 0, sg4 = 0, se = 0, sgam = 0,
         sgam2 = 0;
  for (int i = 0; i < N; ++i) {
    double u = rng.u01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    double g = rng.gaussian();
    sg += g;
    sg2 += g * g;
    sg4 += g * g * g * g;
    se += rng.exponential();
    double gm = rng.gamma(2.5);
    sgam += gm;
    sgam2 += gm * gm;
  }
  CHECK_THAT(su / N, Catch::Matchers::WithinAbs(0.5, 0.003));
  CHECK_THAT(su2 / N - 0.25, Catch::Matchers::WithinAbs(1.0 / 12.0, 0.003));
  CHECK_THAT(sg / N, Catch::Matchers::WithinAbs(0.0, 0.01));
  CHECK_THAT(sg2 / N, Catch::Matchers::WithinAbs(1.0, 0.02));
  CHECK_THAT(sg4 / N, Catch::Matchers::WithinAbs(3.0, 0.1));
  CHECK_THAT(se / N, Catch::Matchers::WithinAbs(1.0, 0.01));
  CHECK_THAT(sgam / N, Catch::Matchers::WithinAbs(2.5, 0.02));
  CHECK_THAT(sgam2 / N - 6.25, Catch::Matchers::WithinAbs(2.5, 0.06));
}

TEST_CASE("small-shape gamma boost is unbiased") {
  RngStream rng(2025, 1);
  const int N = 200000;
  double s = 0;
  for (int i = 0; i < N; ++i) s += rng.gamma(0.4);
  CHECK_THAT(s / N, Catch::Matchers::WithinAbs(0.4, 0.01));
}

TEST_CASE("unit vectors live on the sphere with uniform marginals") {
  RngStream rng(7, 3);
  const int n = 5, N = 50000;
  double s2 = 0;
  for (int i = 0; i < N; ++i) {
    Vec u = rng.unit_vec(n);
    REQUIRE_THAT(u.norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    s2 += u[0] * u[0];
  }
  CHECK_THAT(s2 / N, Catch::Matchers::WithinAbs(1.0 / n, 0.005));
}

TEST_CASE("direction sets index by (seed, i) so prefixes agree") {
  DirectionSet big = sample_sphere(3, 100, 99);
  DirectionSet small = sample_sphere(3, 40, 99);
  CHECK(big.directions.topRows(40) == small.directions);
  DirectionSet other = sample_sphere(3, 40, 100);
  CHECK(big.directions.topRows(40) != other.directions);
}

TEST_CASE("sampled rotations are orthogonal with unit determinant magnitude") {
  // Haar measure on the full orthogonal group: det is +-1, never degenerate.
  for (int n : {2, 5}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      Mat q = sample_rotation(n, seed);
      Mat dev = q.transpose() * q - Mat::Identity(n, n);
      CHECK(dev.cwiseAbs().maxCoeff() < 1e-12);
      CHECK_THAT(std::abs(q.determinant()),
                 Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("rotation sampling is not biased toward a fixed quadrant") {
  // Haar invariance implies E q(0,0) = 0 and E q(0,0)^2 = 1/n.
  const int n = 3, N = 4000;
  double s = 0, s2 = 0;
  for (int i = 0; i < N; ++i) {
    Mat q = sample_rotation(n, 10000 + i);
    s += q(0, 0);
    s2 += q(0, 0) * q(0, 0);
  }
  CHECK_THAT(s / N, Catch::Matchers::WithinAbs(0.0, 0.03));
  CHECK_THAT(s2 / N, Catch::Matchers::WithinAbs(1.0 / n, 0.03));
}

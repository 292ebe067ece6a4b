#pragma once

// Independent numeric oracles for the test suite: fixed-order Gauss-Legendre
// quadrature and closed forms derived from it.  Deliberately implemented
// without the library's own special-function helpers so the two sides of
// each comparison are independent.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// 64-point Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
// iteration on the Legendre polynomial.
inline const std::vector<std::pair<double, double>>& gl64() {
  static const std::vector<std::pair<double, double>> table = [] {
    const int n = 64;
    std::vector<std::pair<double, double>> t(n);
    for (int i = 0; i < n; ++i) {
      // Initial guess: Chebyshev-like node.
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        // Evaluate P_n and P_n' by recurrence.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      t[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return t;
  }();
  return table;
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (const auto& [x, w] : gl64()) sum += w * f(mid + half * x);
  return half * sum;
}

// E |u_1|^q for u uniform on the unit sphere S^{n-1}, via the angular
// representation: int cos^q sin^{n-2} / int sin^{n-2} on [0, pi/2].
inline double sphere_abs_moment(int n, double q) {
  if (n == 1) return 1.0;
  auto numer = [&](double phi) {
    return std::pow(std::cos(phi), q) *
           std::pow(std::sin(phi), double(n - 2));
  };
  auto denom = [&](double phi) {
    return std::pow(std::sin(phi), double(n - 2));
  };
  return integrate(numer, 0.0, 0.5 * M_PI) /
         integrate(denom, 0.0, 0.5 * M_PI);
}

// E |<x, e_1>|^q for x uniform in the unit ball of R^n: radial factor
// n/(n+q) times the sphere moment.
inline double ball_abs_marginal_moment(int n, double q) {
  return double(n) / (double(n) + q) * sphere_abs_moment(n, q);
}

// Unit-volume ball radius via the log-gamma form (independent of the
// library's helper only in the sense of being spelled out here).
inline double volume_one_ball_radius(int n) {
  double log_kappa =
      0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0);
  return std::exp(-log_kappa / n);
}

// Area of the intersection of the disk of radius r centered at (cx, cy)
// with the unit square [-1/2, 1/2]^2.  Substituting x = cx + r sin(theta)
// removes the square-root singularity at the tangency points; the integrand
// is then smooth except where the circle crosses a horizontal edge, so the
// quadrature is split at those angles and converges to machine precision.
// Used as a brute-force check for planar truncation fractions.
inline double disk_square_area(double cx, double cy, double r) {
  auto clamp_unit = [](double t) { return std::max(-1.0, std::min(1.0, t)); };
  auto chord_theta = [&](double theta) {
    double half = r * std::cos(theta);  // half-chord of the disk at this x
    double lo = std::max(-0.5, cy - half), hi = std::min(0.5, cy + half);
    return std::max(0.0, hi - lo) * r * std::cos(theta);
  };
  double a = std::max(-0.5, cx - r), b = std::min(0.5, cx + r);
  if (a >= b) return 0.0;
  double t1 = std::asin(clamp_unit((a - cx) / r));
  double t2 = std::asin(clamp_unit((b - cx) / r));
  std::vector<double> cuts = {t1, t2};
  // kinks: r cos(theta) equal to the distance from cy to either edge
  for (double d : {0.5 - cy, cy + 0.5}) {
    if (d >= 0.0 && d <= r) {
      double tk = std::acos(d / r);  // in [0, pi/2]
      for (double s : {tk, -tk})
        if (s > t1 && s < t2) cuts.push_back(s);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    area += integrate(chord_theta, cuts[i], cuts[i + 1]);
  return area;
}

}  // namespace oracles

#pragma once

// Shared aliases, error types and closed-form constants used across the
// library.  Everything lives in namespace slicelab.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace slicelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors.  All library errors derive from Error so callers can catch one type;
// the subclasses distinguish "you asked for an oracle this body cannot
// provide" from "the budget was too small to say anything" from plain bad
// input.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A requested oracle (membership, support, nearest point, ...) is not
// implemented for the given shape combination.
class OracleUnavailableError : public Error {
 public:
  explicit OracleUnavailableError(const std::string& what) : Error(what) {}
};

// An estimator was invoked with too little data to produce a usable value
// (empty halfspace counts, non-PD covariance, ...).
class InsufficientBudgetError : public Error {
 public:
  explicit InsufficientBudgetError(const std::string& what) : Error(what) {}
};

// Malformed geometric input: non-invertible affine map, unbounded polytope,
// dimension mismatch, out-of-range exponent, ...
class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(what) {}
};

// Configuration / schema errors carry the JSON-ish path of the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error("config error at '" + path + "': " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Interior-point search failure inside a random-walk step; carries the point
// at which the chord computation broke down.
class ChordError : public Error {
 public:
  ChordError(const std::string& what, Vec point)
      : Error(what), point_(std::move(point)) {}
  const Vec& point() const { return point_; }

 private:
  Vec point_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw GeometryError(what);
}

// ---------------------------------------------------------------------------
// Closed-form constants.

// Volume of the unit Euclidean ball in R^n.
inline double unit_ball_volume(int n) {
  require(n >= 1, "unit_ball_volume: dimension must be >= 1");
  return std::exp(0.5 * n * std::log(pi) - std::lgamma(0.5 * n + 1.0));
}

// Radius of the volume-one Euclidean ball in R^n.
inline double volume_one_ball_radius(int n) {
  return std::pow(unit_ball_volume(n), -1.0 / n);
}

// E |theta_1|^q for theta uniform on the unit sphere S^{n-1}, q > -1.
// Equals B((q+1)/2, (n-1)/2) / B(1/2, (n-1)/2); the n = 1 sphere is {-1, 1}
// where the moment is 1.
inline double sphere_abs_moment(int n, double q) {
  require(n >= 1, "sphere_abs_moment: dimension must be >= 1");
  require(q > -1.0, "sphere_abs_moment: exponent must be > -1");
  if (n == 1) return 1.0;
  return std::exp(std::lgamma(0.5 * (q + 1.0)) + std::lgamma(0.5 * n) -
                  std::lgamma(0.5) - std::lgamma(0.5 * (n + q)));
}

// (E |theta_1|^q)^{1/q}: the exact averaging constant appearing in the
// rotation-average identity; behaves like sqrt(q/(n+q)).
inline double sphere_moment_constant(int n, double q) {
  require(q != 0.0, "sphere_moment_constant: q must be nonzero");
  return std::pow(sphere_abs_moment(n, q), 1.0 / q);
}

// ---------------------------------------------------------------------------
// Small formatting helpers (printf-style, locale-independent).

inline std::string format_double(double v, int precision = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return std::string(buf);
}

template <typename T>
inline std::string str(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace slicelab

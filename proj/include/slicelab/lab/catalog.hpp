#pragma once

// Built-in body catalog: volume-one, centered, isotropic-position realizations
// of the standard test bodies, with their closed-form constants where known.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "slicelab/body.hpp"
#include "slicelab/common.hpp"

namespace slicelab::lab {

// Volume-one scale factors.
inline double cross_volume_one_scale(int n) {
  // |{ ||x||_1 <= s }| = (2s)^n / n!
  return std::pow(std::tgamma(double(n) + 1.0), 1.0 / double(n)) / 2.0;
}

inline double simplex_volume_one_scale(int n) {
  return std::pow(detail::regular_simplex_volume(n), -1.0 / double(n));
}

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"cube", "ball", "cross",
                                              "simplex"};
  return names;
}

// Volume-one realization of a named catalog body in dimension n.
inline Body catalog_body(const std::string& name, int n) {
  require(n >= 1, "catalog_body: dimension must be >= 1");
  if (name == "cube") return Body::cube(n);
  if (name == "ball") return Body::ball(n, volume_one_ball_radius(n));
  if (name == "cross")
    return Body::cross_polytope(n, cross_volume_one_scale(n));
  if (name == "simplex") return Body::simplex(n, simplex_volume_one_scale(n));
  throw ConfigError("catalog_body",
                    "unknown body name '" + name +
                        "' (known: cube, ball, cross, simplex)");
}

// Closed-form isotropic constants of the catalog bodies (volume-one
// normalization).  Derivations: direct second-moment integrals; the cross
// value uses E[x_1^2] = 2/((n+1)(n+2)) on the unit ell_1 ball, the simplex
// value the inertia of the regular volume-one simplex.
inline std::optional<double> closed_form_l(const std::string& name, int n) {
  const double nd = double(n);
  if (name == "cube") return std::sqrt(1.0 / 12.0);
  if (name == "ball") return volume_one_ball_radius(n) / std::sqrt(nd + 2.0);
  if (name == "cross")
    return cross_volume_one_scale(n) *
           std::sqrt(2.0 / ((nd + 1.0) * (nd + 2.0)));
  if (name == "simplex")
    return std::pow(std::tgamma(nd + 1.0), 1.0 / nd) /
           std::sqrt(std::pow(nd + 1.0, (nd + 1.0) / nd) * (nd + 2.0));
  return std::nullopt;
}

// Circumradius of the volume-one catalog bodies.
inline std::optional<double> closed_form_radius(const std::string& name,
                                                int n) {
  if (name == "cube") return std::sqrt(double(n)) / 2.0;
  if (name == "ball") return volume_one_ball_radius(n);
  if (name == "cross") return cross_volume_one_scale(n);
  if (name == "simplex") {
    // The centered simplex is built with unit circumradius, so the
    // volume-one circumradius is the scale itself.
    return simplex_volume_one_scale(n);
  }
  return std::nullopt;
}

// Diameter-to-sqrt(n)L ratio used by the small-diameter screen
// R(K) <= gamma sqrt(n) L_K.
inline std::optional<double> closed_form_gamma(const std::string& name,
                                               int n) {
  auto r = closed_form_radius(name, n);
  auto l = closed_form_l(name, n);
  if (!r || !l) return std::nullopt;
  return *r / (std::sqrt(double(n)) * *l);
}

struct CatalogEntry {
  std::string name;  // catalog name or "custom"
  int n = 0;
  Body body;
  std::optional<double> l_closed;  // closed-form isotropic constant if known
};

}  // namespace slicelab::lab

#pragma once

// JSON schema for bodies.
//
//   {"shape": "cube",    "n": 4, "side": 1.0}
//   {"shape": "ball",    "n": 3, "radius": 0.5}
//   {"shape": "cross",   "n": 2, "scale": 1.0}
//   {"shape": "lp",      "n": 2, "p": 3.0, "scale": 1.0}
//   {"shape": "simplex", "n": 2, "scale": 1.0, "centered": true}
//   {"shape": "hpoly",   "n": 2, "normals": [[...], ...], "offsets": [...]}
//   {"shape": "affine",  "inner": {...}, "matrix": [[...], ...],
//                        "translation": [...]}
//   {"shape": "minkowski", "a": {...}, "b": {...}}
//
// An optional "volume_normalized": true rescales the body to volume one at
// parse time (closed-form volume required).  Bodies produced by constructions
// serialize with shape "derived" and carry their construction parameters;
// they are rebuilt by the construction layer, not here.

#include <string>

#include <json.hpp>

#include "slicelab/body.hpp"
#include "slicelab/common.hpp"

namespace slicelab {

using nlohmann::json;

namespace detail {

inline double get_number(const json& j, const std::string& key, double dflt,
                         const std::string& path) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number())
    throw ConfigError(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

inline int get_dim(const json& j, const std::string& path) {
  if (!j.contains("n"))
    throw ConfigError(path + ".n", "missing dimension");
  if (!j.at("n").is_number_integer() || j.at("n").get<int>() < 1)
    throw ConfigError(path + ".n", "dimension must be a positive integer");
  return j.at("n").get<int>();
}

inline Mat get_matrix(const json& j, const std::string& key,
                      const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_array() || v.empty() || !v[0].is_array())
    throw ConfigError(path + "." + key, "expected an array of rows");
  int rows = static_cast<int>(v.size());
  int cols = static_cast<int>(v[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(v[i].size()) != cols)
      throw ConfigError(path + "." + key, "ragged rows");
    for (int c = 0; c < cols; ++c) m(i, c) = v[i][c].get<double>();
  }
  return m;
}

inline Vec get_vector(const json& j, const std::string& key,
                      const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_array())
    throw ConfigError(path + "." + key, "expected an array");
  Vec x(v.size());
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    x[i] = v[i].get<double>();
  return x;
}

}  // namespace detail

Body body_from_json(const json& j, const std::string& path = "body");

namespace detail {

inline Body body_from_json_impl(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  if (!j.contains("shape")) throw ConfigError(path + ".shape", "missing");
  std::string shape = j.at("shape").get<std::string>();
  try {
    if (shape == "cube")
      return Body::cube(get_dim(j, path), get_number(j, "side", 1.0, path));
    if (shape == "ball")
      return Body::ball(get_dim(j, path), get_number(j, "radius", 1.0, path));
    if (shape == "cross")
      return Body::cross_polytope(get_dim(j, path),
                                  get_number(j, "scale", 1.0, path));
    if (shape == "lp") {
      if (!j.contains("p")) throw ConfigError(path + ".p", "missing exponent");
      return Body::lp_ball(get_dim(j, path), j.at("p").get<double>(),
                           get_number(j, "scale", 1.0, path));
    }
    if (shape == "simplex")
      return Body::simplex(get_dim(j, path), get_number(j, "scale", 1.0, path),
                           j.value("centered", true));
    if (shape == "hpoly") {
      Mat normals = get_matrix(j, "normals", path);
      Vec offsets = get_vector(j, "offsets", path);
      return Body::h_polytope(std::move(normals), std::move(offsets));
    }
    if (shape == "affine") {
      Body inner = body_from_json(j.at("inner"), path + ".inner");
      Mat m = get_matrix(j, "matrix", path);
      Vec t = j.contains("translation")
                  ? get_vector(j, "translation", path)
                  : Vec(Vec::Zero(m.rows()));
      return apply_affine(inner, AffineMap(std::move(m), std::move(t)));
    }
    if (shape == "minkowski")
      return Body::minkowski_sum(body_from_json(j.at("a"), path + ".a"),
                                 body_from_json(j.at("b"), path + ".b"));
    if (shape == "derived")
      throw ConfigError(path,
                        "derived bodies are rebuilt by the construction "
                        "layer (rebuild_derived_body), not by body_from_json");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".shape", "unknown shape '" + shape + "'");
}

}  // namespace detail

inline Body body_from_json(const json& j, const std::string& path) {
  Body b = detail::body_from_json_impl(j, path);
  if (j.value("volume_normalized", false)) {
    auto v = b.exact_volume();
    if (!v)
      throw ConfigError(path + ".volume_normalized",
                        "closed-form volume unavailable for this shape; "
                        "normalize explicitly with an MC budget");
    b = scale_body(b, std::pow(*v, -1.0 / b.dim())).with_label(b.label());
  }
  return b;
}

inline json body_to_json(const Body& b) {
  struct V {
    const Body* self;
    json operator()(const EuclideanBall& s) const {
      return json{{"shape", "ball"}, {"n", self->dim()}, {"radius", s.radius}};
    }
    json operator()(const CubeShape& s) const {
      return json{{"shape", "cube"}, {"n", self->dim()}, {"side", s.side}};
    }
    json operator()(const CrossPolytope& s) const {
      return json{{"shape", "cross"}, {"n", self->dim()}, {"scale", s.scale}};
    }
    json operator()(const LpBall& s) const {
      return json{{"shape", "lp"},
                  {"n", self->dim()},
                  {"p", s.exponent},
                  {"scale", s.scale}};
    }
    json operator()(const SimplexShape& s) const {
      return json{{"shape", "simplex"},
                  {"n", self->dim()},
                  {"scale", s.scale},
                  {"centered", s.centered}};
    }
    json operator()(const HPolytopeShape& s) const {
      json normals = json::array();
      for (int i = 0; i < s.normals.rows(); ++i) {
        json row = json::array();
        for (int c = 0; c < s.normals.cols(); ++c)
          row.push_back(s.normals(i, c));
        normals.push_back(row);
      }
      json offsets = json::array();
      for (int i = 0; i < s.offsets.size(); ++i)
        offsets.push_back(s.offsets[i]);
      return json{{"shape", "hpoly"},
                  {"n", self->dim()},
                  {"normals", normals},
                  {"offsets", offsets}};
    }
    json operator()(const AffineImageShape& s) const {
      json m = json::array();
      for (int i = 0; i < s.map.matrix().rows(); ++i) {
        json row = json::array();
        for (int c = 0; c < s.map.matrix().cols(); ++c)
          row.push_back(s.map.matrix()(i, c));
        m.push_back(row);
      }
      json t = json::array();
      for (int i = 0; i < s.map.translation().size(); ++i)
        t.push_back(s.map.translation()[i]);
      return json{{"shape", "affine"},
                  {"inner", body_to_json(*s.inner)},
                  {"matrix", m},
                  {"translation", t}};
    }
    json operator()(const MinkowskiSumShape& s) const {
      return json{{"shape", "minkowski"},
                  {"a", body_to_json(*s.a)},
                  {"b", body_to_json(*s.b)}};
    }
    json operator()(const OracleShape& s) const {
      json out = json::parse(s.provenance, nullptr, false);
      if (out.is_discarded() || !out.is_object())
        out = json{{"provenance", s.provenance}};
      out["shape"] = "derived";
      out["n"] = self->dim();
      out["bounding_radius"] = s.bounding_radius;
      if (s.volume) out["volume"] = *s.volume;
      return out;
    }
  };
  return std::visit(V{&b}, b.shape());
}

}  // namespace slicelab

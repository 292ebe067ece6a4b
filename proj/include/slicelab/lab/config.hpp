#pragma once

// Experiment configuration: JSON schema, validation, and grid resolution for
// the laboratory runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicelab/common.hpp"

namespace slicelab::lab {

using nlohmann::json;

struct Budgets {
  std::int64_t outer = 10000;      // outer Monte-Carlo sample per estimate
  std::int64_t inner = 10000;      // inner sample for nested estimates
  std::int64_t directions = 1000;  // direction-grid size for support scans
  std::int64_t rotations = 64;     // Haar rotations for rotation averages
  std::int64_t replications = 8;   // independent replications per estimate
};

// Suite-level constants.  All of them are knobs of the verdict policy, not
// claims: they are printed in every report header.
struct Constants {
  double c1 = 7.3890560989306495;  // truncation threshold multiplier (e^2)
  double beta2_bar = 1.0;          // truncation mass exponent
  double rho = 0.1;                // small-slicing screen I_1 <= rho n L^2
  double c7 = 0.5;                 // convolution containment, lower factor
  double c8 = 4.0;                 // convolution containment, upper factor
  double audit_c = 0.2;            // lower-bound floor constant
  double kappa = 1.0;              // covering regularity constant
  double tau = 0.25;               // covering admissibility threshold
  double gamma_max = 2.0;          // small-diameter screen R <= gamma sqrt(n) L
};

struct OutputSpec {
  std::string path = "lab_out";
  std::vector<std::string> formats{"csv", "json", "plot"};
};

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{
      "isotropy",     "centroid", "slicing", "lemmas",
      "construction", "covering", "bq_gamma"};
  return s;
}

struct ExperimentConfig {
  // Catalog names (strings) or body schema objects.
  std::vector<json> bodies{json("cube"), json("ball"), json("cross"),
                           json("simplex")};
  std::vector<int> n_grid{2, 4, 8, 16};
  std::vector<json> q_grid{1, 2, 4, 8, "sqrt_n", "n"};  // ints or the two keywords
  Budgets budgets;
  std::uint64_t seed = 20260825;
  std::vector<std::string> suites = known_suites();
  Constants constants;
  OutputSpec output;

  // Resolve the q grid in dimension n: substitute the keywords, round,
  // drop values outside [1, n], deduplicate, sort ascending.
  std::vector<double> q_values(int n) const {
    std::vector<double> out;
    for (const json& j : q_grid) {
      double q;
      if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "sqrt_n")
          q = std::round(std::sqrt(double(n)));
        else if (s == "n")
          q = double(n);
        else
          throw ConfigError("config.q_grid",
                            "unknown keyword '" + s +
                                "' (use integers, \"sqrt_n\" or \"n\")");
      } else {
        q = std::round(j.get<double>());
      }
      if (q >= 1.0 && q <= double(n)) out.push_back(q);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void validate() const {
    if (bodies.empty()) throw ConfigError("config.bodies", "must be nonempty");
    if (n_grid.empty()) throw ConfigError("config.n_grid", "must be nonempty");
    for (int n : n_grid)
      if (n < 1) throw ConfigError("config.n_grid", "dimensions must be >= 1");
    if (q_grid.empty()) throw ConfigError("config.q_grid", "must be nonempty");
    for (const json& j : q_grid) {
      if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s != "sqrt_n" && s != "n")
          throw ConfigError("config.q_grid", "unknown keyword '" + s + "'");
      } else if (!j.is_number()) {
        throw ConfigError("config.q_grid",
                          "entries must be numbers or keywords");
      } else if (j.get<double>() < 1.0) {
        throw ConfigError("config.q_grid", "q values must be >= 1");
      }
    }
    if (budgets.outer <= 0 || budgets.inner <= 0 || budgets.directions <= 0 ||
        budgets.rotations <= 0 || budgets.replications <= 0)
      throw ConfigError("config.budgets", "all budgets must be positive");
    if (!(constants.c1 > 0.0 && constants.beta2_bar > 0.0 &&
          constants.rho > 0.0 && constants.c7 > 0.0 && constants.c8 > 0.0 &&
          constants.audit_c > 0.0 && constants.kappa > 0.0 &&
          constants.tau > 0.0 && constants.gamma_max > 0.0))
      throw ConfigError("config.constants", "all constants must be positive");
    if (suites.empty()) throw ConfigError("config.suites", "must be nonempty");
    for (const std::string& s : suites)
      if (std::find(known_suites().begin(), known_suites().end(), s) ==
          known_suites().end())
        throw ConfigError("config.suites", "unknown suite '" + s + "'");
    for (const std::string& f : output.formats)
      if (f != "csv" && f != "json" && f != "plot")
        throw ConfigError("config.output.formats",
                          "unknown format '" + f + "' (use csv, json, plot)");
  }

  bool has_suite(const std::string& name) const {
    return std::find(suites.begin(), suites.end(), name) != suites.end();
  }

  json to_json() const {
    json j;
    j["bodies"] = bodies;
    j["n_grid"] = n_grid;
    j["q_grid"] = q_grid;
    j["budgets"] = {{"outer", budgets.outer},
                    {"inner", budgets.inner},
                    {"directions", budgets.directions},
                    {"rotations", budgets.rotations},
                    {"replications", budgets.replications}};
    j["seed"] = seed;
    j["suites"] = suites;
    j["constants"] = {{"c1", constants.c1},
                      {"beta2_bar", constants.beta2_bar},
                      {"rho", constants.rho},
                      {"c7", constants.c7},
                      {"c8", constants.c8},
                      {"audit_c", constants.audit_c},
                      {"kappa", constants.kappa},
                      {"tau", constants.tau},
                      {"gamma_max", constants.gamma_max}};
    j["output"] = {{"path", output.path}, {"formats", output.formats}};
    return j;
  }

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    try {
      if (j.contains("bodies"))
        c.bodies = std::vector<json>(j.at("bodies").begin(),
                                     j.at("bodies").end());
      if (j.contains("n_grid"))
        c.n_grid = j.at("n_grid").get<std::vector<int>>();
      if (j.contains("q_grid"))
        c.q_grid = std::vector<json>(j.at("q_grid").begin(),
                                     j.at("q_grid").end());
      if (j.contains("budgets")) {
        const json& b = j.at("budgets");
        if (b.contains("outer")) c.budgets.outer = b.at("outer");
        if (b.contains("inner")) c.budgets.inner = b.at("inner");
        if (b.contains("directions"))
          c.budgets.directions = b.at("directions");
        if (b.contains("rotations")) c.budgets.rotations = b.at("rotations");
        if (b.contains("replications"))
          c.budgets.replications = b.at("replications");
      }
      if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("suites"))
        c.suites = j.at("suites").get<std::vector<std::string>>();
      if (j.contains("constants")) {
        const json& k = j.at("constants");
        if (k.contains("c1")) c.constants.c1 = k.at("c1");
        if (k.contains("beta2_bar")) c.constants.beta2_bar = k.at("beta2_bar");
        if (k.contains("rho")) c.constants.rho = k.at("rho");
        if (k.contains("c7")) c.constants.c7 = k.at("c7");
        if (k.contains("c8")) c.constants.c8 = k.at("c8");
        if (k.contains("audit_c")) c.constants.audit_c = k.at("audit_c");
        if (k.contains("kappa")) c.constants.kappa = k.at("kappa");
        if (k.contains("tau")) c.constants.tau = k.at("tau");
        if (k.contains("gamma_max")) c.constants.gamma_max = k.at("gamma_max");
      }
      if (j.contains("output")) {
        const json& o = j.at("output");
        if (o.contains("path")) c.output.path = o.at("path");
        if (o.contains("formats"))
          c.output.formats = o.at("formats").get<std::vector<std::string>>();
      }
    } catch (const json::exception& e) {
      throw ConfigError("config",
                        std::string("malformed field (") + e.what() + ")");
    }
    c.validate();
    return c;
  }
};

}  // namespace slicelab::lab

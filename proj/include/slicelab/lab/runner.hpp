#pragma once

// Experiment orchestration: run the configured suites over the body catalog,
// collect verdict rows, and emit reports.

#include <chrono>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slicelab/lab/config.hpp"
#include "slicelab/lab/report.hpp"
#include "slicelab/lab/suites.hpp"

namespace slicelab::lab {

// Check ids that a full run of the default configuration must produce.
// Tests use this as a coverage manifest: a run with all suites enabled, the
// four catalog families, n_grid containing 2 and q_grid containing 2, emits
// at least one row per id.
inline const std::vector<std::string>& required_check_ids() {
  static const std::vector<std::string> ids = {
      // isotropy
      "iso-l-closed-form", "iso-defect", "iso-center",
      // centroid calculus
      "centroid-cube-hq-e1", "centroid-z2-ball-identity",
      "centroid-inclusion-monotone", "centroid-inclusion-growth",
      "centroid-width-consistency", "centroid-kstar-z2",
      "centroid-qstar-floor",
      // slicing parameter
      "slicing-i1", "slicing-upper-z2", "slicing-upper-radius",
      "slicing-upper-qsqrtn", "slicing-floor-holder", "slicing-floor-radius",
      "slicing-floor-santalo", "slicing-floor-santalo-literal",
      "slicing-negative-moment", "slicing-holder-i2", "slicing-i1-monotone",
      "slicing-qstar",
      // lemma audits
      "lemma-max-moment", "lemma-max-moment-crossover",
      "lemma-rotation-average", "lemma-rotation-small-fraction",
      "lemma-truncation-lower", "lemma-truncation-upper",
      // constructions
      "constr-w-markov", "constr-w-fraction", "constr-k1-z2-sandwich",
      "constr-k1-containment", "constr-k1-second-moment", "constr-rebuild",
      "constr-t0", "constr-p0", "constr-implied-l", "constr-ballbody-gauge",
      "constr-kb1", "constr-kb2", "constr-conv-gamma",
      "constr-conv-additivity", "constr-conv-containment", "constr-conv-ratio",
      // covering regularity
      "cover-sandwich", "cover-beyond-radius", "cover-regular",
      "cover-kappa-fit", "cover-cube-band",
      // catalog tables
      "bq-anq-screen", "bq-uncond-band", "bq-min", "bq-b2-band",
      "bq-gamma-max"};
  return ids;
}

inline json policy_header() {
  return json{
      {"verdict_policy",
       "inequalities allow three combined standard errors of slack; "
       "order-of-magnitude equivalences assert the ratio in [1/4, 4]"},
      {"covering_caveat",
       "covering numbers are computed on sampled point clouds with centers "
       "restricted to sample points"},
      {"isotropy_caveat",
       "bodies are used in their exact isotropic position where closed forms "
       "exist; measured constants carry Monte-Carlo error"}};
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  LabContext ctx(cfg);

  ExperimentReport rep;
  rep.header = json{{"config", cfg.to_json()}, {"policy", policy_header()}};

  // Canonical suite order, independent of the order given in the config.
  for (const std::string& name : known_suites()) {
    if (!ctx.cfg.has_suite(name)) continue;
    if (name == "isotropy") run_isotropy_suite(ctx, rep);
    else if (name == "centroid") run_centroid_suite(ctx, rep);
    else if (name == "slicing") run_slicing_suite(ctx, rep);
    else if (name == "lemmas") run_lemmas_suite(ctx, rep);
    else if (name == "construction") run_construction_suite(ctx, rep);
    else if (name == "covering") run_covering_suite(ctx, rep);
    else if (name == "bq_gamma") run_bq_gamma_suite(ctx, rep);
  }

  rep.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

// Pivot of the catalog-table rows: one line per (n, q) with the catalog
// minimum of the normalized slicing ratio and the diameter-screened maximum.
inline std::string bq_gamma_table(const ExperimentReport& rep) {
  struct Cell {
    double b_min = 0.0;
    std::string b_body;
    double g_max = 0.0;
    std::string g_body;
    bool g_skip = false;
  };
  std::map<std::pair<int, int>, Cell> cells;
  for (const ReportRow& r : rep.rows) {
    if (r.suite != "bq_gamma") continue;
    auto key = std::make_pair(r.n, int(std::lround(r.q)));
    if (r.check_id == "bq-min" || r.check_id == "bq-b2-band") {
      cells[key].b_min = r.value;
      cells[key].b_body = r.body;
    } else if (r.check_id == "bq-gamma-max") {
      if (r.verdict == Verdict::skip) {
        cells[key].g_skip = true;
      } else {
        cells[key].g_max = r.value;
        cells[key].g_body = r.body;
      }
    }
  }
  std::string out = "n,q,b_min,b_argmin,gamma_max,gamma_argmax\n";
  for (const auto& [key, c] : cells) {
    out += std::to_string(key.first) + "," + std::to_string(key.second) + ",";
    out += (c.b_body.empty() ? "" : format_double(c.b_min)) + "," +
           c.b_body + ",";
    if (c.g_skip || c.g_body.empty())
      out += ",";
    else
      out += format_double(c.g_max) + "," + c.g_body;
    out += "\n";
  }
  return out;
}

}  // namespace slicelab::lab

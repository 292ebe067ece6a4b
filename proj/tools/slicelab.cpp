// Command-line front end: full experiment runs, single-functional estimates,
// covering profiles, and the catalog min/max tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicelab/lab/runner.hpp"

namespace {

using namespace slicelab;
using namespace slicelab::lab;

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return ExperimentConfig{};
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config", "invalid JSON in '" + path + "': " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

std::vector<std::string> split_formats(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void warn_threads(int threads) {
  if (threads > 1)
    std::fprintf(stderr,
                 "note: --threads %d accepted but execution is serial; "
                 "results are identical for any thread count\n",
                 threads);
}

int print_failures(const ExperimentReport& rep) {
  int fails = 0;
  for (const ReportRow& r : rep.rows) {
    if (r.verdict != Verdict::fail) continue;
    ++fails;
    std::printf("FAIL  %-28s %-16s n=%-3d q=%-4g value=%.6g bound=%.6g "
                "margin=%.3g\n",
                r.check_id.c_str(), r.body.c_str(), r.n, r.q, r.value,
                r.bound, r.margin);
  }
  return fails;
}

int cmd_run(const std::string& config_path, std::uint64_t seed, bool has_seed,
            const std::string& out_dir, const std::string& formats,
            int threads) {
  warn_threads(threads);
  ExperimentConfig cfg = load_config(config_path);
  if (has_seed) cfg.seed = seed;
  if (!out_dir.empty()) cfg.output.path = out_dir;
  if (!formats.empty()) cfg.output.formats = split_formats(formats);
  cfg.validate();

  ExperimentReport rep = run_experiment(cfg);
  auto written = emit(rep, cfg.output.path, cfg.output.formats);

  auto counts = rep.verdict_counts();
  std::printf("rows: %zu  pass=%d fail=%d info=%d skip=%d  wall=%lld ms\n",
              rep.rows.size(), counts["pass"], counts["fail"], counts["info"],
              counts["skip"], (long long)rep.wall_ms);
  int fails = print_failures(rep);
  for (const auto& f : written) std::printf("wrote %s\n", f.c_str());
  return fails > 0 ? 1 : 0;
}

int cmd_estimate(const std::string& functional, const std::string& body_name,
                 int n, double q, std::int64_t budget, std::uint64_t seed) {
  Body body = catalog_body(body_name, n);
  json out{{"functional", functional},
           {"body", body.label()},
           {"n", n},
           {"seed", seed},
           {"budget", budget}};

  if (functional == "l") {
    IsotropyReport r = isotropy_report(body, budget, seed);
    out["value"] = r.L.value;
    out["std_error"] = r.L.std_error;
    out["covariance_defect"] = r.defect;
  } else if (functional == "i1") {
    NestedBudget nb;
    nb.outer = budget;
    nb.inner = budget;
    Estimate e = slicing_parameter(body, body, q, nb, seed);
    out["q"] = q;
    out["value"] = e.value;
    out["std_error"] = e.std_error;
  } else if (functional == "iq") {
    MomentResult m = radial_moment(sample_uniform(body, budget, seed), q);
    out["q"] = q;
    out["value"] = m.est.value;
    out["std_error"] = m.est.std_error;
    out["effective_sample_size"] = m.effective_sample_size;
  } else if (functional == "hq") {
    PointSample s = sample_uniform(body, budget, seed);
    Vec e1 = Vec::Zero(n);
    e1[0] = 1.0;
    Estimate e = zq_support_from_sample(s, q, e1);
    out["q"] = q;
    out["direction"] = "e1";
    out["value"] = e.value;
    out["std_error"] = e.std_error;
  } else if (functional == "qstar") {
    QstarReport r = qstar_index(body, budget, 64, seed);
    out["value"] = r.q_star;
    json scan = json::array();
    for (auto& [qv, kv] : r.scan) scan.push_back(json{{"q", qv}, {"k", kv}});
    out["scan"] = scan;
  } else if (functional == "kstar") {
    PointSample s = sample_uniform(body, budget, seed);
    ZqEvaluator ev(body, q, s);
    KstarReport r = kstar_index(ev, 128, seed);
    out["q"] = q;
    out["value"] = r.k;
    out["width"] = r.width.value;
    out["radius"] = r.radius.value;
  } else {
    throw ConfigError("estimate",
                      "unknown functional '" + functional +
                          "' (use l, i1, iq, hq, qstar, kstar)");
  }
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

int cmd_profile_covering(const std::string& body_name, int n, double kappa,
                         double tau, std::int64_t budget, std::uint64_t seed,
                         const std::string& out_dir) {
  Body body = catalog_body(body_name, n);
  CoveringProfile prof = regularity_profile(body, kappa, tau, budget, seed);
  std::string csv = prof.to_csv();
  std::printf("# body=%s n=%d kappa=%g tau=%g regular=%d range_empty=%d "
              "kappa_fit=%g\n# %s\n%s",
              prof.body_id.c_str(), prof.dim, prof.kappa, prof.tau,
              int(prof.regular), int(prof.range_empty), prof.kappa_fit,
              prof.caveat.c_str(), csv.c_str());
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    auto path = std::filesystem::path(out_dir) /
                ("covering_" + body_name + "_n" + std::to_string(n) + ".csv");
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << csv;
    std::printf("wrote %s\n", path.string().c_str());
  }
  return 0;
}

int cmd_table_bq(const std::string& config_path, std::uint64_t seed,
                 bool has_seed, const std::string& out_dir, int threads) {
  warn_threads(threads);
  ExperimentConfig cfg = load_config(config_path);
  if (has_seed) cfg.seed = seed;
  cfg.suites = {"bq_gamma"};
  cfg.validate();

  ExperimentReport rep = run_experiment(cfg);
  std::string table = bq_gamma_table(rep);
  std::printf("%s", table.c_str());
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    auto path = std::filesystem::path(out_dir) / "table_bq.csv";
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << table;
    std::printf("wrote %s\n", path.string().c_str());
  }
  int fails = print_failures(rep);
  return fails > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slicelab: numerical experiments on isotropic convex bodies"};
  app.require_subcommand(1);

  std::string config_path, out_dir, formats;
  std::uint64_t seed = 0;
  int threads = 1;

  auto* run = app.add_subcommand("run", "run the configured audit suites");
  run->add_option("--config", config_path, "JSON experiment config");
  auto* run_seed = run->add_option("--seed", seed, "base seed override");
  run->add_option("--threads", threads, "accepted for compatibility; serial");
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--format", formats, "comma-separated: csv,json,plot");

  std::string functional = "l", body_name = "cube";
  int n = 2;
  double q = 2.0, kappa = 1.0, tau = 0.25;
  std::int64_t budget = 100000;

  auto* est = app.add_subcommand("estimate", "estimate a single functional");
  est->add_option("--functional", functional,
                  "one of: l, i1, iq, hq, qstar, kstar");
  est->add_option("--body", body_name, "catalog body name");
  est->add_option("--n", n, "dimension");
  est->add_option("--q", q, "moment order where applicable");
  est->add_option("--budget", budget, "sample budget");
  est->add_option("--seed", seed, "seed");

  auto* cov = app.add_subcommand("profile-covering",
                                 "covering-number regularity profile");
  cov->add_option("--body", body_name, "catalog body name");
  cov->add_option("--n", n, "dimension");
  cov->add_option("--kappa", kappa, "regularity constant");
  cov->add_option("--tau", tau, "admissibility threshold");
  cov->add_option("--budget", budget, "sample budget (>= 10^4)");
  cov->add_option("--seed", seed, "seed");
  cov->add_option("--out", out_dir, "also write the CSV here");

  auto* tbq = app.add_subcommand("table-bq", "catalog min/max slicing tables");
  tbq->add_option("--config", config_path, "JSON experiment config");
  auto* tbq_seed = tbq->add_option("--seed", seed, "base seed override");
  tbq->add_option("--threads", threads, "accepted for compatibility; serial");
  tbq->add_option("--out", out_dir, "also write the CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, seed, run_seed->count() > 0, out_dir,
                     formats, threads);
    if (est->parsed())
      return cmd_estimate(functional, body_name, n, q, budget, seed);
    if (cov->parsed())
      return cmd_profile_covering(body_name, n, kappa, tau, budget, seed,
                                  out_dir);
    if (tbq->parsed())
      return cmd_table_bq(config_path, seed, tbq_seed->count() > 0, out_dir,
                          threads);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

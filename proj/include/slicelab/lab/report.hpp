#pragma once

// Experiment report: verdict rows, summaries, and CSV/JSON/plot-data
// emission.  The CSV is byte-deterministic for a fixed seed and config (it
// carries no timing); wall time lives in the JSON environment block only.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicelab/common.hpp"
#include "slicelab/lab/config.hpp"

namespace slicelab::lab {

enum class Verdict { pass, fail, info, skip };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::info: return "info";
    case Verdict::skip: return "skip";
  }
  return "?";
}

struct ReportRow {
  std::string suite;
  std::string body;     // body id, empty for aggregate rows
  int n = 0;            // 0 when not applicable
  double q = 0.0;       // 0 when not applicable
  std::string quantity; // what was measured
  double value = 0.0;
  double std_error = 0.0;
  double bound = 0.0;   // the compared-against value, 0 when none
  double margin = 0.0;  // slack factor (>= 1 comfortable, < 1 violated)
  Verdict verdict = Verdict::info;
  std::string check_id; // stable identifier of the audit
  std::string note;     // free-form remark (JSON only)

  std::string csv_line() const {
    auto num = [](double x) { return format_double(x); };
    return suite + "," + body + "," + (n > 0 ? std::to_string(n) : "") + "," +
           (q > 0.0 ? num(q) : "") + "," + quantity + "," + num(value) + "," +
           num(std_error) + "," + (bound != 0.0 ? num(bound) : "") + "," +
           (margin != 0.0 ? num(margin) : "") + "," + verdict_name(verdict) +
           "," + check_id + "\n";
  }

  json to_json() const {
    json j{{"suite", suite},       {"body", body},
           {"n", n},               {"q", q},
           {"quantity", quantity}, {"value", value},
           {"std_error", std_error}, {"bound", bound},
           {"margin", margin},     {"verdict", verdict_name(verdict)},
           {"check_id", check_id}};
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  json header;  // seed, budgets, constants, policy notes
  double wall_ms = 0.0;

  void add(ReportRow row) { rows.push_back(std::move(row)); }

  std::map<std::string, int> verdict_counts() const {
    std::map<std::string, int> c{{"pass", 0}, {"fail", 0}, {"info", 0},
                                 {"skip", 0}};
    for (const ReportRow& r : rows) ++c[verdict_name(r.verdict)];
    return c;
  }

  int fail_count() const {
    int k = 0;
    for (const ReportRow& r : rows)
      if (r.verdict == Verdict::fail) ++k;
    return k;
  }

  std::string to_csv() const {
    std::string out =
        "suite,body,n,q,quantity,value,std_error,bound,margin,verdict,"
        "check_id\n";
    for (const ReportRow& r : rows) out += r.csv_line();
    return out;
  }

  // Long-format plot data: one row per measured quantity keyed by (body, q).
  std::string to_plot_csv() const {
    std::string out = "suite,body,n,q,quantity,value,std_error\n";
    for (const ReportRow& r : rows) {
      if (r.q <= 0.0 || r.body.empty()) continue;
      out += r.suite + "," + r.body + "," + std::to_string(r.n) + "," +
             format_double(r.q) + "," + r.quantity + "," +
             format_double(r.value) + "," + format_double(r.std_error) + "\n";
    }
    return out;
  }

  json to_json() const {
    json j;
    j["header"] = header;
    j["rows"] = json::array();
    for (const ReportRow& r : rows) j["rows"].push_back(r.to_json());
    json summary;
    for (const auto& [k, v] : verdict_counts()) summary[k] = v;
    j["summary"] = summary;
    j["environment"] = {{"wall_ms", wall_ms}};
    return j;
  }
};

// Write the selected formats under out_dir; returns the written paths.
inline std::vector<std::string> emit(const ExperimentReport& report,
                                     const std::string& out_dir,
                                     const std::vector<std::string>& formats) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw Error("emit: cannot create output directory '" + out_dir +
                "': " + ec.message());
  std::vector<std::string> written;
  auto write_file = [&](const std::string& name, const std::string& text) {
    fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("emit: cannot open '" + p.string() + "' for writing");
    f << text;
    if (!f) throw Error("emit: write failed for '" + p.string() + "'");
    written.push_back(p.string());
  };
  for (const std::string& fmt : formats) {
    if (fmt == "csv")
      write_file("report.csv", report.to_csv());
    else if (fmt == "json")
      write_file("report.json", report.to_json().dump(2) + "\n");
    else if (fmt == "plot")
      write_file("plot_data.csv", report.to_plot_csv());
    else
      throw ConfigError("emit", "unknown format '" + fmt + "'");
  }
  return written;
}

}  // namespace slicelab::lab

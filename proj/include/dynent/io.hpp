#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dynent/config.hpp"
#include "dynent/errors.hpp"
#include "dynent/estimator.hpp"
#include "dynent/family.hpp"
#include "dynent/metric_space.hpp"
#include "dynent/scenario.hpp"

namespace dynent {

using json = nlohmann::json;

inline json config_to_json(const RunConfig& cfg) {
  json j;
  j["run"]["scenario"] = cfg.scenario;
  j["run"]["seed"] = cfg.seed;
  j["run"]["workers"] = cfg.workers;
  j["run"]["outdir"] = cfg.outdir;
  j["space"]["grid"] = cfg.grid;
  j["family"]["n_max"] = cfg.n_max;
  j["family"]["r_max"] = cfg.r_max;
  j["family"]["r_steps"] = cfg.r_steps;
  j["family"]["dt"] = cfg.dt;
  j["estimator"]["eps"] = cfg.eps;
  j["estimator"]["fit_window_fraction"] = cfg.fit_window_fraction;
  j["estimator"]["saturation_fraction"] = cfg.saturation_fraction;
  j["curves"]["n_curves"] = cfg.n_curves;
  j["curves"]["n_segments"] = cfg.n_segments;
  j["curves"]["n_samples"] = cfg.n_samples;
  j["probe"]["eps_link"] = cfg.eps_link;
  j["probe"]["r_probe"] = cfg.r_probe;
  j["probe"]["n_probe"] = cfg.n_probe;
  return j;
}

inline json report_to_json(const EntropyReport& rep) {
  json j;
  j["h_estimate"] = rep.h_estimate;
  if (rep.best_eps) j["best_eps"] = *rep.best_eps;
  if (rep.half_sample_h) j["half_sample_h"] = *rep.half_sample_h;
  j["lambda_grid"] = rep.lambda_grid;
  j["eps_grid"] = rep.eps_grid;
  j["diagnostics"] = rep.diagnostics;
  json rows = json::array();
  for (const auto& row : rep.rows) {
    json r;
    r["eps"] = row.eps;
    r["counts"] = row.counts;
    json sat = json::array();
    for (char s : row.saturated) sat.push_back(s != 0);
    r["saturated"] = sat;
    r["fit"] = {{"slope", row.fit.slope},
                {"intercept", row.fit.intercept},
                {"residual_rms", row.fit.residual_rms},
                {"window_begin", row.fit.window_begin},
                {"window_end", row.fit.window_end},
                {"valid", row.fit.valid},
                {"constant_fallback", row.fit.constant_fallback}};
    rows.push_back(r);
  }
  j["per_eps"] = rows;
  if (rep.claim_check)
    j["claim_check"] = {{"passed", rep.claim_check->passed}, {"text", rep.claim_check->text}};
  return j;
}

// per-eps table: lambda, epsilon, count, ln_count, in_window
inline void write_report_csv(const EntropyReport& rep, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open " + path);
  f << "lambda,epsilon,count,ln_count,in_window\n";
  char buf[160];
  for (const auto& row : rep.rows) {
    for (std::size_t g = 0; g < row.counts.size(); ++g) {
      const bool in_window = row.fit.valid && g >= row.fit.window_begin && g < row.fit.window_end;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g,%d\n", rep.lambda_grid[g], row.eps,
                    row.counts[g], std::log(static_cast<double>(std::max<std::size_t>(1, row.counts[g]))),
                    in_window ? 1 : 0);
      f << buf;
    }
  }
}

// ---- DistanceFamily directory layout: manifest.json + one CSV per level ----

inline void save_family(const DistanceFamily& fam, const std::string& dir,
                        std::uint64_t seed = 0, const std::string& provenance = "") {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["grid"] = fam.grid;
  manifest["kind"] = family_kind_name(fam.base_kind);
  manifest["seed"] = seed;
  manifest["provenance"] = provenance;
  manifest["levels"] = fam.levels();
  manifest["size"] = fam.size();
  manifest["version"] = kVersion;
  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw Error(Errc::io_error, "cannot write manifest in " + dir);
  mf << manifest.dump(2) << "\n";
  for (std::size_t g = 0; g < fam.levels(); ++g) {
    FiniteMetricSpace tmp;
    tmp.dist = fam.matrices[g];
    for (std::size_t i = 0; i < fam.size(); ++i) tmp.labels.push_back(std::to_string(i));
    dump_metric_csv(tmp, dir + "/matrix_" + std::to_string(g) + ".csv");
  }
}

inline DistanceFamily load_family(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw Error(Errc::io_error, "cannot read manifest in " + dir);
  json manifest = json::parse(mf);
  DistanceFamily fam;
  fam.grid = manifest.at("grid").get<std::vector<double>>();
  fam.base_kind = family_kind_from_name(manifest.at("kind").get<std::string>());
  for (std::size_t g = 0; g < fam.grid.size(); ++g)
    fam.matrices.push_back(load_metric_csv(dir + "/matrix_" + std::to_string(g) + ".csv").dist);
  return fam;
}

// ---- curve bundle CSV: columns t, x1..xd, u1..uk; curves separated by the
// time column restarting at 0 ----

inline void save_bundle_csv(const CurveBundle& bundle, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open " + path);
  if (bundle.curves.empty()) throw Error(Errc::missing_constant_curve, "empty bundle");
  const std::size_t dim = bundle.curves.front().dim();
  std::size_t k = 0;
  for (const Curve& c : bundle.curves)
    if (c.has_controls()) k = std::max(k, c.controls.cols());
  f << "t";
  for (std::size_t d = 0; d < dim; ++d) f << ",x" << d + 1;
  for (std::size_t u = 0; u < k; ++u) f << ",u" << u + 1;
  f << "\n";
  char buf[64];
  for (const Curve& c : bundle.curves) {
    for (std::size_t i = 0; i < c.samples(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", c.times[i]);
      f << buf;
      for (std::size_t d = 0; d < dim; ++d) {
        std::snprintf(buf, sizeof buf, ",%.17g", c.points(i, d));
        f << buf;
      }
      const std::size_t src = c.has_controls() ? std::min(i, c.intervals() - 1) : 0;
      for (std::size_t u = 0; u < k; ++u) {
        std::snprintf(buf, sizeof buf, ",%.17g", c.has_controls() ? c.controls(src, u) : 0.0);
        f << buf;
      }
      f << "\n";
    }
  }
}

inline CurveBundle load_bundle_csv(const std::string& path, double radius = 0.0,
                                   std::size_t base_index = 0) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw Error(Errc::io_error, "empty bundle CSV");
  std::size_t dim = 0, k = 0;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell[0] == 'x') ++dim;
      if (!cell.empty() && cell[0] == 'u') ++k;
    }
  }
  CurveBundle bundle;
  bundle.radius = radius;
  bundle.base_index = base_index;
  std::vector<std::vector<double>> rows;
  auto flush = [&]() {
    if (rows.empty()) return;
    Curve c;
    const std::size_t n = rows.size();
    c.times.resize(n);
    c.points = Mat(n, dim);
    if (k > 0) c.controls = Mat(n - 1, k);
    for (std::size_t i = 0; i < n; ++i) {
      c.times[i] = rows[i][0];
      for (std::size_t d = 0; d < dim; ++d) c.points(i, d) = rows[i][1 + d];
      if (k > 0 && i + 1 < n)
        for (std::size_t u = 0; u < k; ++u) c.controls(i, u) = rows[i][1 + dim + u];
    }
    bundle.curves.push_back(std::move(c));
    rows.clear();
  };
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != 1 + dim + k) throw Error(Errc::io_error, "bundle CSV row width mismatch");
    if (row[0] == 0.0) flush();
    rows.push_back(std::move(row));
  }
  flush();
  return bundle;
}

inline json outcome_to_json(const ScenarioOutcome& out, const RunConfig& effective) {
  json j;
  j["scenario"] = out.scenario;
  j["version"] = kVersion;
  j["config"] = config_to_json(effective);
  j["report"] = report_to_json(out.report);
  for (const auto& [label, rep] : out.extra_reports) j["extra_reports"][label] = report_to_json(rep);
  if (out.claim)
    j["claim_check"] = {{"passed", out.claim->passed}, {"text", out.claim->text}};
  j["notes"] = out.notes;
  for (const auto& [k, v] : out.meta) j["meta"][k] = v;
  return j;
}

}  // namespace dynent

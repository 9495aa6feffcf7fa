#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dynent/accessibility.hpp"
#include "dynent/config.hpp"
#include "dynent/io.hpp"
#include "dynent/scenario.hpp"
#include "dynent/systems.hpp"

namespace dynent {

// ---- flat dotted-key config files: one `section.key = value` per line ----

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_size = [&](const char* what) -> std::size_t {
    try {
      return static_cast<std::size_t>(std::stoull(value));
    } catch (...) {
      throw Error(Errc::config_error, std::string(what) + " expects an unsigned integer");
    }
  };
  auto as_double = [&](const char* what) -> double {
    try {
      return std::stod(value);
    } catch (...) {
      throw Error(Errc::config_error, std::string(what) + " expects a number");
    }
  };
  if (key == "run.scenario") cfg.scenario = value;
  else if (key == "run.seed") {
    try {
      if (!value.empty() && value[0] == '-')
        throw Error(Errc::config_error, "seed must be nonnegative");
      cfg.seed = std::stoull(value);
    } catch (const Error&) {
      throw;
    } catch (...) {
      throw Error(Errc::config_error, "run.seed expects an unsigned integer");
    }
    cfg.seed_set = true;
  } else if (key == "run.workers") cfg.workers = static_cast<unsigned>(as_size("run.workers"));
  else if (key == "run.outdir") cfg.outdir = value;
  else if (key == "space.grid") cfg.grid = as_size("space.grid");
  else if (key == "family.n_max") cfg.n_max = as_size("family.n_max");
  else if (key == "family.r_max") cfg.r_max = as_double("family.r_max");
  else if (key == "family.r_steps") cfg.r_steps = as_size("family.r_steps");
  else if (key == "family.dt") cfg.dt = as_double("family.dt");
  else if (key == "estimator.eps") {
    cfg.eps.clear();
    std::stringstream ss(value);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.empty()) continue;
      try {
        cfg.eps.push_back(std::stod(cell));
      } catch (...) {
        throw Error(Errc::config_error, "estimator.eps expects comma-separated numbers");
      }
    }
  } else if (key == "estimator.fit_window_fraction")
    cfg.fit_window_fraction = as_double("estimator.fit_window_fraction");
  else if (key == "estimator.saturation_fraction")
    cfg.saturation_fraction = as_double("estimator.saturation_fraction");
  else if (key == "curves.n_curves") cfg.n_curves = as_size("curves.n_curves");
  else if (key == "curves.n_segments") cfg.n_segments = as_size("curves.n_segments");
  else if (key == "curves.n_samples") cfg.n_samples = as_size("curves.n_samples");
  else if (key == "probe.eps_link") cfg.eps_link = as_double("probe.eps_link");
  else if (key == "probe.r_probe") cfg.r_probe = as_double("probe.r_probe");
  else if (key == "probe.n_probe") cfg.n_probe = as_size("probe.n_probe");
  else throw Error(Errc::config_error, "unknown config key '" + key + "'");
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::config_error, "cannot read config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config_error,
                  path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

// ---- run: scenario -> family -> report -> files; exit-code contract ----
// 0 pass, 2 claim-check fail, 3 config error, 4 numeric/runtime error

inline void write_error_file(const std::string& outdir, const Error& e) {
  if (outdir.empty()) return;
  std::filesystem::create_directories(outdir);
  json j;
  j["error"] = e.name();
  j["message"] = e.what();
  std::ofstream f(outdir + "/errors.json");
  f << j.dump(2) << "\n";
}

inline int run(const RunConfig& request, std::ostream& log = std::cout) {
  RunConfig effective;
  try {
    effective = scenario_defaults(request);  // validates the effective config
  } catch (const Error& e) {
    log << "config error: " << e.what() << "\n";
    write_error_file(request.outdir, e);
    return 3;
  }
  try {
    const ScenarioOutcome out = execute_scenario(effective);
    if (!effective.outdir.empty()) {
      std::filesystem::create_directories(effective.outdir);
      json manifest;
      manifest["scenario"] = out.scenario;
      for (const auto& info : scenario_registry())
        if (info.name == out.scenario) {
          manifest["summary"] = info.summary;
          manifest["target_claim"] = info.target_claim;
        }
      manifest["version"] = kVersion;
      manifest["config"] = config_to_json(effective);
      std::ofstream mf(effective.outdir + "/manifest.json");
      mf << manifest.dump(2) << "\n";
      std::ofstream rf(effective.outdir + "/report.json");
      rf << outcome_to_json(out, effective).dump(2) << "\n";
      write_report_csv(out.report, effective.outdir + "/report_main.csv");
      for (const auto& [label, rep] : out.extra_reports)
        write_report_csv(rep, effective.outdir + "/report_" + label + ".csv");
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "h_estimate = %.6f", out.report.h_estimate);
    log << out.scenario << ": " << buf << "\n";
    if (out.claim) {
      log << "claim: " << (out.claim->passed ? "PASS" : "FAIL") << " (" << out.claim->text
          << ")\n";
      return out.claim->passed ? 0 : 2;
    }
    return 0;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    write_error_file(effective.outdir, e);
    switch (e.code()) {
      case Errc::unknown_scenario:
      case Errc::bad_override:
      case Errc::config_error:
      case Errc::unknown_parameter:
        return 3;
      default:
        return 4;
    }
  }
}

// ---- sweep: one run per value, shared seed, consolidated CSV ----

inline bool sweepable_parameter(const std::string& name) {
  static const char* names[] = {"grid",       "n_max",      "r_max",     "r_steps",
                                "n_curves",   "n_segments", "n_samples", "dt",
                                "fit_window_fraction", "saturation_fraction",
                                "eps",        "eps_link",   "r_probe",   "n_probe",
                                "workers"};
  for (const char* n : names)
    if (name == n) return true;
  return false;
}

inline void set_sweep_parameter(RunConfig& cfg, const std::string& name, double value) {
  if (name == "grid") cfg.grid = static_cast<std::size_t>(value);
  else if (name == "n_max") cfg.n_max = static_cast<std::size_t>(value);
  else if (name == "r_max") cfg.r_max = value;
  else if (name == "r_steps") cfg.r_steps = static_cast<std::size_t>(value);
  else if (name == "n_curves") cfg.n_curves = static_cast<std::size_t>(value);
  else if (name == "n_segments") cfg.n_segments = static_cast<std::size_t>(value);
  else if (name == "n_samples") cfg.n_samples = static_cast<std::size_t>(value);
  else if (name == "dt") cfg.dt = value;
  else if (name == "fit_window_fraction") cfg.fit_window_fraction = value;
  else if (name == "saturation_fraction") cfg.saturation_fraction = value;
  else if (name == "eps") cfg.eps = {value};  // single-cell grid per sweep row
  else if (name == "eps_link") cfg.eps_link = value;
  else if (name == "r_probe") cfg.r_probe = value;
  else if (name == "n_probe") cfg.n_probe = static_cast<std::size_t>(value);
  else if (name == "workers") cfg.workers = static_cast<unsigned>(value);
  else throw Error(Errc::unknown_parameter, "'" + name + "' is not sweepable");
}

inline int sweep(const RunConfig& base, const std::string& parameter,
                 const std::vector<double>& values, std::ostream& log = std::cout) {
  try {
    if (!sweepable_parameter(parameter))
      throw Error(Errc::unknown_parameter, "'" + parameter + "' is not sweepable");
    if (values.empty()) throw Error(Errc::unknown_parameter, "sweep needs at least one value");
    (void)scenario_defaults(base);
  } catch (const Error& e) {
    log << "sweep error: " << e.what() << "\n";
    return 3;
  }
  std::ostringstream csv;
  csv << "parameter,value,h_estimate,claim_passed\n";
  for (double v : values) {
    RunConfig cfg = base;
    set_sweep_parameter(cfg, parameter, v);
    cfg.outdir.clear();  // per-value artifacts stay in memory; CSV is the product
    try {
      const RunConfig effective = scenario_defaults(cfg);
      const ScenarioOutcome out = execute_scenario(effective);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%d\n", parameter.c_str(), v,
                    out.report.h_estimate, out.claim ? (out.claim->passed ? 1 : 0) : 1);
      csv << buf;
      log << parameter << "=" << v << " -> h=" << out.report.h_estimate << "\n";
    } catch (const Error& e) {
      log << "sweep error at " << parameter << "=" << v << ": " << e.what() << "\n";
      return e.code() == Errc::config_error || e.code() == Errc::unknown_scenario ? 3 : 4;
    }
  }
  if (!base.outdir.empty()) {
    std::filesystem::create_directories(base.outdir);
    std::ofstream f(base.outdir + "/sweep_" + parameter + ".csv");
    f << csv.str();
  } else {
    log << csv.str();
  }
  return 0;
}

// ---- selftest: the brute-force oracle suites ----

namespace detail {

inline FiniteMetricSpace selftest_space(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  FiniteMetricSpace s;
  if (seed % 2 == 0) {
    Mat pts(n, 3);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 3; ++c) pts(i, c) = rng.uniform();
    s.dist = Mat(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < 3; ++c)
          acc += (pts(i, c) - pts(j, c)) * (pts(i, c) - pts(j, c));
        s.dist(i, j) = std::sqrt(acc);
      }
  } else {
    Mat d(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = 0.05 + rng.uniform();
        d(i, j) = d(j, i) = w;
      }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    s.dist = std::move(d);
  }
  for (std::size_t i = 0; i < n; ++i) s.labels.push_back(std::to_string(i));
  return s;
}

}  // namespace detail

// Brute-force oracle suites; exit 0 iff all pass. Deterministic output.
inline int selftest(const std::vector<std::string>& fixture_csvs = {},
                    std::ostream& log = std::cout) {
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail = "") {
    log << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) log << ": " << detail;
    log << "\n";
    all_ok = all_ok && ok;
  };

  // 1. exact bracket + greedy sandwich on 50 seeded metrics
  {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 50 && ok; ++seed) {
      const std::size_t n = 5 + seed % 6;  // 5..10
      const auto s = detail::selftest_space(n, seed);
      const double diam = s.diameter();
      for (double frac : {0.2, 0.4, 0.7}) {
        const double eps = frac * diam;
        const auto rows = bracket_check(s.dist, {eps});
        if (!rows[0].ok) {
          ok = false;
          detail = "seed " + std::to_string(seed) + " eps " + std::to_string(eps);
          break;
        }
      }
    }
    report("bracket oracle on 50 seeded spaces", ok, detail);
  }

  // 2. builder families validate as metric-valid and monotone on coarse grids
  {
    bool ok = true;
    std::string detail;
    try {
      TorusModel circle{1, 1.0};
      const auto cspace = space_from_points(
          circle_grid(32), [&](const double* a, const double* b) { return circle.dist(a, b); });
      std::vector<std::size_t> dbl(32), rot(32);
      for (std::size_t i = 0; i < 32; ++i) {
        dbl[i] = (2 * i) % 32;
        rot[i] = (i + 13) % 32;
      }
      for (const auto* fam : {&dbl, &rot}) {
        const auto f = bowen_family(cspace, *fam, 5);
        const auto problems = validate_family(f, &cspace.dist);
        if (!problems.empty()) {
          ok = false;
          detail = problems.front();
        }
      }
      TorusModel torus{2, 1.0};
      const auto tspace = space_from_points(
          torus.grid_sample(6), [&](const double* a, const double* b) { return torus.dist(a, b); });
      auto field = [](const double*, double* dx) {
        dx[0] = 1.0;
        dx[1] = 0.618;
      };
      const auto ff = flow_family(
          tspace, [&](const double* a, const double* b) { return torus.dist(a, b); }, field,
          {0.0, 0.5, 1.0}, 0.01);
      auto problems = validate_family(ff, &tspace.dist);
      if (!problems.empty()) {
        ok = false;
        detail = problems.front();
      }
      const auto sys = torus_full_rank_system(torus);
      const Mat coords = torus.grid_sample(3);
      const std::vector<double> r_grid{0.0, 0.5, 1.0};
      BundleBuildOptions bopt;
      bopt.per_level = 4;
      const auto bundles = build_nested_bundles(sys, coords, r_grid, 12345, bopt);
      const auto cf = curve_family(
          coords, [&](const double* a, const double* b) { return torus.dist(a, b); }, r_grid,
          bundles);
      problems = validate_family(cf, nullptr);
      if (!problems.empty()) {
        ok = false;
        detail = problems.front();
      }
    } catch (const Error& e) {
      ok = false;
      detail = e.what();
    }
    report("family builders validate on coarse grids", ok, detail);
  }

  // 3. least-norm quotient against a dense grid search
  {
    bool ok = true;
    std::string detail;
    try {
      AnchoredSystem sys;
      sys.dim = 1;
      sys.control_dim = 2;
      sys.norm = ControlNorm::euclidean(2);
      sys.generators = [](const double*, Mat& b) {
        b(0, 0) = 1.0;
        b(0, 1) = 1.0;
      };
      sys.base_dist = [](const double* a, const double* b) { return std::abs(a[0] - b[0]); };
      const double x = 0.0;
      const double got = quotient_norm(sys, &x, Vec{1.0});
      double best = 1e300;
      for (double t = -2.0; t <= 3.0; t += 1e-4)
        best = std::min(best, std::sqrt(t * t + (1.0 - t) * (1.0 - t)));
      if (std::abs(got - best) > 1e-4 * best) {
        ok = false;
        detail = "quadratic kernel-line case off";
      }
      sys.norm = ControlNorm::convex(2, [](const double* u, std::size_t) {
        return std::pow(std::pow(std::abs(u[0]), 4.0) + std::pow(std::abs(u[1]), 4.0), 0.25);
      });
      const double got2 = quotient_norm(sys, &x, Vec{1.0});
      double best2 = 1e300;
      for (double t = -2.0; t <= 3.0; t += 1e-4) {
        const double u[2] = {t, 1.0 - t};
        best2 = std::min(best2, sys.norm(u));
      }
      if (std::abs(got2 - best2) > 1e-4 * best2 + 1e-9) {
        ok = false;
        detail = "convex kernel-line case off";
      }
    } catch (const Error& e) {
      ok = false;
      detail = e.what();
    }
    report("quotient norm vs grid-search oracle", ok, detail);
  }

  // 4. worker-count independence of a sampled curve family
  {
    bool ok = true;
    std::string detail;
    try {
      TorusModel torus{2, 1.0};
      const auto sys = torus_full_rank_system(torus);
      const Mat coords = torus.grid_sample(3);
      const std::vector<double> r_grid{0.0, 0.4, 0.8};
      auto metric = [&](const double* a, const double* b) { return torus.dist(a, b); };
      DistanceFamily fams[2];
      for (int w = 0; w < 2; ++w) {
        BundleBuildOptions bopt;
        bopt.per_level = 4;
        bopt.workers = w == 0 ? 1 : 4;
        const auto bundles = build_nested_bundles(sys, coords, r_grid, 777, bopt);
        fams[w] = curve_family(coords, metric, r_grid, bundles, bopt.workers);
      }
      for (std::size_t g = 0; g < r_grid.size() && ok; ++g)
        if (!(fams[0].matrices[g] == fams[1].matrices[g])) {
          ok = false;
          detail = "matrices differ at level " + std::to_string(g);
        }
    } catch (const Error& e) {
      ok = false;
      detail = e.what();
    }
    report("worker-count independence", ok, detail);
  }

  // 5. user-supplied fixture matrices
  for (const auto& path : fixture_csvs) {
    bool ok = true;
    std::string detail;
    try {
      const auto s = load_metric_csv(path);
      const auto viol = validate_metric(s.dist, kDefaultMetricTol);
      if (!viol.empty()) {
        ok = false;
        detail = viol.front().describe();
      }
    } catch (const Error& e) {
      ok = false;
      detail = e.what();
    }
    report("fixture " + path, ok, detail);
  }

  log << (all_ok ? "selftest: all suites passed\n" : "selftest: FAILURES above\n");
  return all_ok ? 0 : 4;
}

// ---- validate: metric CSV checking for the CLI ----

inline int validate_csv(const std::string& path, double tol, std::ostream& log = std::cout) {
  try {
    const auto s = load_metric_csv(path);
    const auto viol = validate_metric(s.dist, tol);
    if (viol.empty()) {
      log << path << ": valid metric on " << s.size() << " points\n";
      return 0;
    }
    log << path << ": " << viol.size() << " violation(s)\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(viol.size(), 20); ++i)
      log << "  " << viol[i].describe() << "\n";
    return 4;
  } catch (const Error& e) {
    log << "validate error: " << e.what() << "\n";
    return e.code() == Errc::io_error ? 3 : 4;
  }
}

}  // namespace dynent

// Experiment driver: growth-rate entropy estimation for families of
// increasing metrics on sampled manifolds.
#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "dynent/runner.hpp"

namespace {

struct CliState {
  dynent::RunConfig cfg;
  std::string config_path;
  long long seed = -1;
  std::vector<double> eps;
};

void add_run_options(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path, "flat key=value config file, applied first");
  cmd->add_option("-s,--scenario", st.cfg.scenario, "scenario name (see list-scenarios)");
  cmd->add_option("--seed", st.seed, "root seed (mandatory, no wall-clock default)");
  cmd->add_option("--grid", st.cfg.grid, "primary sample-size knob (scenario-specific)");
  cmd->add_option("--n-max", st.cfg.n_max, "iteration horizon for map families");
  cmd->add_option("--r-max", st.cfg.r_max, "budget horizon for flow/curve families");
  cmd->add_option("--r-steps", st.cfg.r_steps, "nonzero grid values up to r-max");
  cmd->add_option("--eps", st.eps, "descending eps grid")->delimiter(',');
  cmd->add_option("--n-curves", st.cfg.n_curves, "curves per point at the top budget");
  cmd->add_option("--n-segments", st.cfg.n_segments, "piecewise-constant control segments");
  cmd->add_option("--n-samples", st.cfg.n_samples, "time samples per curve");
  cmd->add_option("--dt", st.cfg.dt, "integrator step bound");
  cmd->add_option("--fit-window-fraction", st.cfg.fit_window_fraction,
                  "trailing fraction of the usable grid used by the fit");
  cmd->add_option("--saturation-fraction", st.cfg.saturation_fraction,
                  "counts at this fraction of n are treated as saturated");
  cmd->add_option("--eps-link", st.cfg.eps_link, "gap tolerance for reachability links");
  cmd->add_option("--r-probe", st.cfg.r_probe, "budget for accessibility probing");
  cmd->add_option("--n-probe", st.cfg.n_probe, "probe curves per point");
  cmd->add_option("-w,--workers", st.cfg.workers, "worker pool size");
  cmd->add_option("-o,--outdir", st.cfg.outdir, "report directory");
}

dynent::RunConfig assemble(const CliState& st, const CLI::App* cmd) {
  dynent::RunConfig cfg;
  if (!st.config_path.empty()) dynent::load_config_file(cfg, st.config_path);
  // flags the user actually passed override the file
  auto passed = [cmd](const char* name) { return cmd->count(name) > 0; };
  if (passed("--scenario")) cfg.scenario = st.cfg.scenario;
  if (passed("--grid")) cfg.grid = st.cfg.grid;
  if (passed("--n-max")) cfg.n_max = st.cfg.n_max;
  if (passed("--r-max")) cfg.r_max = st.cfg.r_max;
  if (passed("--r-steps")) cfg.r_steps = st.cfg.r_steps;
  if (passed("--n-curves")) cfg.n_curves = st.cfg.n_curves;
  if (passed("--n-segments")) cfg.n_segments = st.cfg.n_segments;
  if (passed("--n-samples")) cfg.n_samples = st.cfg.n_samples;
  if (passed("--dt")) cfg.dt = st.cfg.dt;
  if (passed("--fit-window-fraction")) cfg.fit_window_fraction = st.cfg.fit_window_fraction;
  if (passed("--saturation-fraction")) cfg.saturation_fraction = st.cfg.saturation_fraction;
  if (passed("--eps-link")) cfg.eps_link = st.cfg.eps_link;
  if (passed("--r-probe")) cfg.r_probe = st.cfg.r_probe;
  if (passed("--n-probe")) cfg.n_probe = st.cfg.n_probe;
  if (passed("--workers")) cfg.workers = st.cfg.workers;
  if (passed("--outdir")) cfg.outdir = st.cfg.outdir;
  if (passed("--eps")) cfg.eps = st.eps;
  if (passed("--seed")) {
    if (st.seed < 0)
      throw dynent::Error(dynent::Errc::config_error, "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(st.seed);
    cfg.seed_set = true;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"growth-rate entropy estimation for increasing metric families"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list-scenarios", "print the scenario registry");

  CliState run_state;
  auto* run_cmd = app.add_subcommand("run", "run one scenario and write reports");
  add_run_options(run_cmd, run_state);

  CliState sweep_state;
  std::string sweep_param;
  std::vector<double> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "re-run a scenario across parameter values");
  add_run_options(sweep_cmd, sweep_state);
  sweep_cmd->add_option("--parameter", sweep_param, "numeric field to sweep")->required();
  sweep_cmd->add_option("--values", sweep_values, "values to sweep over")->delimiter(',');

  std::vector<std::string> fixtures;
  auto* selftest_cmd = app.add_subcommand("selftest", "run the brute-force oracle suites");
  selftest_cmd->add_option("--fixture", fixtures, "extra metric CSVs to validate");

  std::string validate_path;
  double validate_tol = dynent::kDefaultMetricTol;
  auto* validate_cmd = app.add_subcommand("validate", "check a metric CSV");
  validate_cmd->add_option("csv", validate_path, "distance matrix CSV")->required();
  validate_cmd->add_option("--tol", validate_tol, "metric tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const auto& s : dynent::scenario_registry())
        std::cout << s.name << "\n  " << s.summary << "\n  checks: " << s.target_claim << "\n";
      return 0;
    }
    if (run_cmd->parsed()) return dynent::run(assemble(run_state, run_cmd));
    if (sweep_cmd->parsed())
      return dynent::sweep(assemble(sweep_state, sweep_cmd), sweep_param, sweep_values);
    if (selftest_cmd->parsed()) return dynent::selftest(fixtures);
    if (validate_cmd->parsed()) return dynent::validate_csv(validate_path, validate_tol);
  } catch (const dynent::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

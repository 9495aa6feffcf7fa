#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynent/errors.hpp"

namespace dynent {

inline constexpr const char* kVersion = "0.1.0";

// Effective parameters of one experiment run. Zeros mean "scenario default";
// the seed has no default on purpose.
struct RunConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  bool seed_set = false;

  std::size_t grid = 0;       // primary sample size knob, scenario-specific
  std::size_t n_max = 0;      // iteration horizon for map/pseudogroup families
  double r_max = 0.0;         // budget horizon for flow/curve families
  std::size_t r_steps = 0;    // nonzero grid values between 0 and r_max
  std::vector<double> eps;    // descending
  std::size_t n_curves = 0;   // curves per point at the top budget level
  std::size_t n_segments = 0; // 0 = scenario default (8 unless stated)
  std::size_t n_samples = 0;  // 0 = scenario default (65 unless stated)
  double dt = 1e-2;
  double fit_window_fraction = 0.5;
  double saturation_fraction = 0.25;
  double eps_link = 0.0;
  double r_probe = 0.0;
  std::size_t n_probe = 0;
  unsigned workers = 1;
  std::string outdir;
};

inline void validate_config(const RunConfig& cfg) {
  if (!cfg.seed_set)
    throw Error(Errc::config_error, "seed is mandatory; there is no wall-clock default");
  if (cfg.scenario.empty()) throw Error(Errc::config_error, "scenario name required");
  if (cfg.n_samples < 3) throw Error(Errc::config_error, "n_samples must be >= 3");
  if (cfg.n_segments < 1 || (cfg.n_samples - 1) % cfg.n_segments != 0)
    throw Error(Errc::config_error, "n_segments must divide n_samples - 1");
  if (cfg.dt <= 0.0) throw Error(Errc::config_error, "dt must be positive");
  if (!(cfg.fit_window_fraction > 0.0 && cfg.fit_window_fraction <= 1.0))
    throw Error(Errc::config_error, "fit_window_fraction must be in (0, 1]");
  if (!(cfg.saturation_fraction > 0.0 && cfg.saturation_fraction <= 1.0))
    throw Error(Errc::config_error, "saturation_fraction must be in (0, 1]");
  if (cfg.r_max < 0.0 || cfg.eps_link < 0.0 || cfg.r_probe < 0.0)
    throw Error(Errc::config_error, "lengths must be nonnegative");
  if (cfg.workers < 1) throw Error(Errc::config_error, "workers must be >= 1");
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    if (cfg.eps[i] <= 0.0) throw Error(Errc::config_error, "eps values must be positive");
    if (i > 0 && cfg.eps[i] >= cfg.eps[i - 1])
      throw Error(Errc::config_error, "eps grid must be strictly descending");
  }
}

}  // namespace dynent

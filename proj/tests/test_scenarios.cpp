#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dynent/family.hpp"
#include "dynent/manifold.hpp"
#include "dynent/scenario.hpp"

using namespace dynent;

namespace {

RunConfig base_config(const std::string& scenario, std::uint64_t seed = 2024) {
  RunConfig cfg;
  cfg.scenario = scenario;
  cfg.seed = seed;
  cfg.seed_set = true;
  cfg.workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("registry lists the twelve scenarios") {
  const auto& reg = scenario_registry();
  CHECK(reg.size() == 12);
  for (const char* name :
       {"map_doubling", "map_cat", "map_rotation", "flow_linear_torus", "dist_full_rank",
        "dist_heisenberg", "fol_linear_torus", "fol_sphere_latitude", "submersion_lift",
        "product_pair", "scaled_finsler", "sing_flow_pair"})
    CHECK(scenario_known(name));
  CHECK_FALSE(scenario_known("map_unknown"));
  CHECK_THROWS_AS(execute_scenario(base_config("map_unknown")), Error);
}

TEST_CASE("defaults require a seed and snap power-of-two grids") {
  RunConfig cfg;
  cfg.scenario = "map_doubling";
  CHECK_THROWS_AS(scenario_defaults(cfg), Error);
  auto snapped = base_config("map_doubling");
  snapped.grid = 1000;
  CHECK(scenario_defaults(snapped).grid == 1024);
}

TEST_CASE("rotation scenario is null") {
  auto cfg = base_config("map_rotation");
  cfg.grid = 64;
  cfg.n_max = 6;
  const auto out = execute_scenario(cfg);
  CHECK(out.report.h_estimate <= 0.05);
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
}

TEST_CASE("doubling scenario lands near ln 2 even on a coarse grid") {
  auto cfg = base_config("map_doubling");
  cfg.grid = 256;
  cfg.n_max = 8;
  const auto out = execute_scenario(cfg);
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
  CHECK(out.report.h_estimate == doctest::Approx(std::log(2.0)).epsilon(0.12));
}

TEST_CASE("cat-map orbits match direct integer-matrix iteration") {
  TorusModel torus{2, 1.0};
  const Mat coords = torus.grid_sample(64);
  auto metric = [torus](const double* a, const double* b) { return torus.dist(a, b); };
  auto cat = [](const double* x, double* y) {
    y[0] = std::fmod(2.0 * x[0] + x[1], 1.0);
    y[1] = std::fmod(x[0] + x[1], 1.0);
  };
  const auto fam = orbit_bowen_family(coords, metric, cat, 4);
  // integer oracle on grid indices
  const std::size_t N = 64;
  auto iterate = [N](std::size_t idx) {
    const std::size_t i = idx / N, j = idx % N;
    return ((2 * i + j) % N) * N + ((i + j) % N);
  };
  for (std::size_t p = 0; p < N * N; p += 911)
    for (std::size_t q = 0; q < N * N; q += 677) {
      std::size_t a = p, b = q;
      double expect = metric(coords.row(a), coords.row(b));
      for (int s = 0; s < 4; ++s) {
        a = iterate(a);
        b = iterate(b);
        expect = std::max(expect, metric(coords.row(a), coords.row(b)));
      }
      CHECK(fam.distance(4, p, q) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("flow scenario on the torus is null") {
  auto cfg = base_config("flow_linear_torus");
  cfg.grid = 8;
  cfg.r_max = 2.0;
  cfg.r_steps = 4;
  const auto out = execute_scenario(cfg);
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
  CHECK(out.report.h_estimate <= 1e-9);
}

TEST_CASE("full-rank curve scenario: null estimate and plateau") {
  auto cfg = base_config("dist_full_rank");
  cfg.grid = 3;
  cfg.r_steps = 5;
  cfg.n_curves = 10;
  const auto out = execute_scenario(cfg);
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
  CHECK(out.meta.at("accessibility_classes") == "1");
  CHECK(out.report.half_sample_h.has_value());
}

TEST_CASE("linear foliation curve scenario is null") {
  auto cfg = base_config("fol_linear_torus");
  cfg.grid = 4;
  cfg.r_steps = 5;
  cfg.n_curves = 10;
  const auto out = execute_scenario(cfg);
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
  CHECK(out.report.h_estimate <= 1e-9);
}

TEST_CASE("sphere latitude scenario: null estimate, exact leaf labels") {
  auto cfg = base_config("fol_sphere_latitude");
  cfg.grid = 4;
  cfg.r_steps = 6;
  cfg.n_curves = 12;
  cfg.n_probe = 12;
  const auto out = execute_scenario(cfg);
  REQUIRE(out.claim.has_value());
  CHECK(out.meta.at("leaf_labels_exact") == "true");
  CHECK(out.claim->passed);
}

TEST_CASE("submersion lift dominates the base counts") {
  const auto out = execute_scenario(base_config("submersion_lift"));
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
  REQUIRE(out.extra_reports.size() == 1);
  CHECK(out.report.h_estimate >= out.extra_reports[0].second.h_estimate - 0.05);
}

TEST_CASE("product scenario is additive within tolerance") {
  auto cfg = base_config("product_pair");
  cfg.grid = 128;
  cfg.n_max = 7;
  const auto out = execute_scenario(cfg);
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
  const double h_doub = std::stod(out.meta.at("h_doubling"));
  const double h_rot = std::stod(out.meta.at("h_rotation"));
  CHECK(h_rot <= 0.05);
  CHECK(std::abs(out.report.h_estimate - h_doub - h_rot) <= 0.1);
}

TEST_CASE("scaled control norm reproduces the reindexed family") {
  const auto out = execute_scenario(base_config("scaled_finsler"));
  REQUIRE(out.claim.has_value());
  CHECK(out.claim->passed);
  CHECK(std::stod(out.meta.at("max_entry_gap")) <= 1e-9);
}

TEST_CASE("singular flow pair runs as a diagnostic") {
  auto cfg = base_config("sing_flow_pair");
  cfg.grid = 32;
  cfg.r_steps = 4;
  cfg.n_curves = 8;
  const auto out = execute_scenario(cfg);
  CHECK_FALSE(out.claim.has_value());
  CHECK(out.meta.count("h_quadratic_zero") == 1);
  CHECK(out.meta.count("h_steeper_zero") == 1);
  REQUIRE(out.extra_reports.size() == 1);
}

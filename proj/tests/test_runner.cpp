#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynent/io.hpp"
#include "dynent/runner.hpp"

using namespace dynent;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dynent_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config file parsing") {
  const auto dir = scratch_dir("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# comment line\n";
    f << "run.scenario = map_rotation\n";
    f << "run.seed = 9\n";
    f << "space.grid = 64\n";
    f << "family.n_max = 5\n";
    f << "estimator.eps = 0.2,0.1\n";
    f << "estimator.fit_window_fraction = 0.6\n";
    f << "curves.n_segments = 4\n";
  }
  RunConfig cfg;
  load_config_file(cfg, (dir / "run.cfg").string());
  CHECK(cfg.scenario == "map_rotation");
  CHECK(cfg.seed == 9);
  CHECK(cfg.seed_set);
  CHECK(cfg.grid == 64);
  CHECK(cfg.n_max == 5);
  REQUIRE(cfg.eps.size() == 2);
  CHECK(cfg.eps[0] == 0.2);
  CHECK(cfg.fit_window_fraction == 0.6);
  CHECK(cfg.n_segments == 4);

  RunConfig bad;
  CHECK_THROWS_AS(apply_config_entry(bad, "run.speed", "3"), Error);
  CHECK_THROWS_AS(apply_config_entry(bad, "run.seed", "-4"), Error);
  {
    std::ofstream f(dir / "broken.cfg");
    f << "run.scenario map_rotation\n";
  }
  CHECK_THROWS_AS(load_config_file(bad, (dir / "broken.cfg").string()), Error);
}

TEST_CASE("config validation catches bad fields") {
  RunConfig cfg;
  cfg.scenario = "map_rotation";
  cfg.seed_set = true;
  cfg.n_samples = 65;
  cfg.n_segments = 8;
  cfg.eps = {0.1, 0.2};  // not descending
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.eps = {0.2, 0.1};
  cfg.n_segments = 7;  // does not divide 64
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.n_segments = 8;
  validate_config(cfg);
}

TEST_CASE("run writes reports and respects the exit-code contract") {
  const auto dir = scratch_dir("run");
  RunConfig cfg;
  cfg.scenario = "map_rotation";
  cfg.grid = 64;
  cfg.n_max = 6;
  cfg.seed = 5;
  cfg.seed_set = true;
  cfg.outdir = (dir / "out").string();
  std::ostringstream log;
  CHECK(run(cfg, log) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(fs::exists(dir / "out" / "report.json"));
  CHECK(fs::exists(dir / "out" / "report_main.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "errors.json"));
  const auto rep = json::parse(slurp((dir / "out" / "report.json").string()));
  CHECK(rep["claim_check"]["passed"].get<bool>());
  CHECK(rep["config"]["run"]["seed"].get<std::uint64_t>() == 5);
  CHECK(rep["version"].get<std::string>() == kVersion);

  // missing seed is a config error
  RunConfig noseed = cfg;
  noseed.seed_set = false;
  noseed.outdir = (dir / "noseed").string();
  CHECK(run(noseed, log) == 3);
  CHECK(fs::exists(dir / "noseed" / "errors.json"));

  // unknown scenario is a config error
  RunConfig unknown = cfg;
  unknown.scenario = "nope";
  CHECK(run(unknown, log) == 3);

  // an under-resolved doubling grid cannot reach the claimed window: exit 2
  RunConfig fail = cfg;
  fail.scenario = "map_doubling";
  fail.grid = 16;
  fail.n_max = 4;
  fail.outdir.clear();
  CHECK(run(fail, log) == 2);
}

TEST_CASE("reports are byte-identical across worker counts") {
  const auto dir = scratch_dir("det");
  for (unsigned workers : {1u, 4u}) {
    RunConfig cfg;
    cfg.scenario = "dist_full_rank";
    cfg.grid = 3;
    cfg.r_steps = 4;
    cfg.n_curves = 8;
    cfg.seed = 31;
    cfg.seed_set = true;
    cfg.workers = workers;
    cfg.outdir = (dir / ("w" + std::to_string(workers))).string();
    std::ostringstream log;
    CHECK(run(cfg, log) == 0);
  }
  CHECK(slurp((dir / "w1" / "report_main.csv").string()) ==
        slurp((dir / "w4" / "report_main.csv").string()));
  auto j1 = json::parse(slurp((dir / "w1" / "report.json").string()));
  auto j4 = json::parse(slurp((dir / "w4" / "report.json").string()));
  // requested pool size and target directory are the only fields allowed to differ
  for (auto* j : {&j1, &j4}) {
    (*j)["config"]["run"]["workers"] = 0;
    (*j)["config"]["run"]["outdir"] = "";
  }
  CHECK(j1.dump() == j4.dump());
}

TEST_CASE("sweep produces one row per value") {
  const auto dir = scratch_dir("sweep");
  RunConfig cfg;
  cfg.scenario = "dist_full_rank";
  cfg.grid = 3;
  cfg.r_steps = 4;
  cfg.seed = 8;
  cfg.seed_set = true;
  cfg.outdir = dir.string();
  std::ostringstream log;
  CHECK(sweep(cfg, "n_curves", {4, 8}, log) == 0);
  const auto csv = slurp((dir / "sweep_n_curves.csv").string());
  CHECK(csv.find("parameter,value,h_estimate,claim_passed") == 0);
  CHECK(csv.find("n_curves,4,") != std::string::npos);
  CHECK(csv.find("n_curves,8,") != std::string::npos);

  CHECK(sweep(cfg, "n_curves", {}, log) == 3);
  CHECK(sweep(cfg, "banana", {1.0}, log) == 3);
}

TEST_CASE("sweeping eps over a descending grid yields nondecreasing slopes") {
  const auto dir = scratch_dir("sweep_eps");
  RunConfig cfg;
  cfg.scenario = "map_doubling";
  cfg.seed = 6;
  cfg.seed_set = true;
  cfg.outdir = dir.string();
  std::ostringstream log;
  CHECK(sweep(cfg, "eps", {0.1, 0.05, 0.02}, log) == 0);
  std::ifstream f(dir / "sweep_eps.csv");
  std::string line;
  std::getline(f, line);  // header
  double prev = -1.0;
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    const auto c3 = line.find(',', c2 + 1);
    const double h = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
    CHECK(h >= prev - 0.05);
    prev = std::max(prev, h);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("selftest passes clean and names injected violations") {
  std::ostringstream log;
  CHECK(selftest({}, log) == 0);
  CHECK(log.str().find("[FAIL]") == std::string::npos);

  const auto dir = scratch_dir("fixture");
  {
    std::ofstream f(dir / "bad.csv");
    f << "a,b,c\n";
    f << "0,1,3\n";
    f << "1,0,1\n";
    f << "3,1,0\n";  // 3 > 1 + 1: triangle violation
  }
  std::ostringstream log2;
  CHECK(selftest({(dir / "bad.csv").string()}, log2) != 0);
  CHECK(log2.str().find("triangle") != std::string::npos);

  // deterministic output on repeat
  std::ostringstream log3;
  selftest({(dir / "bad.csv").string()}, log3);
  CHECK(log2.str() == log3.str());
}

TEST_CASE("validate subcommand logic") {
  const auto dir = scratch_dir("validate");
  {
    std::ofstream f(dir / "good.csv");
    f << "a,b\n0,1\n1,0\n";
  }
  {
    std::ofstream f(dir / "bad.csv");
    f << "a,b,c\n0,1,3\n1,0,1\n3,1,0\n";
  }
  std::ostringstream log;
  CHECK(validate_csv((dir / "good.csv").string(), 1e-9, log) == 0);
  CHECK(validate_csv((dir / "bad.csv").string(), 1e-9, log) == 4);
  CHECK(validate_csv((dir / "missing.csv").string(), 1e-9, log) == 3);
}

TEST_CASE("curve bundle CSV round-trips") {
  const auto dir = scratch_dir("bundle");
  TorusModel torus{2, 1.0};
  const auto sys = torus_full_rank_system(torus);
  const double x[2] = {0.25, 0.75};
  const auto bundle = sample_bounded_curves(sys, x, 0, 0.5, 3, 8, 321);
  const std::string path = (dir / "bundle.csv").string();
  save_bundle_csv(bundle, path);
  const auto back = load_bundle_csv(path, bundle.radius, bundle.base_index);
  REQUIRE(back.curves.size() == bundle.curves.size());
  for (std::size_t c = 0; c < bundle.curves.size(); ++c) {
    const Curve& a = bundle.curves[c];
    const Curve& b = back.curves[c];
    REQUIRE(a.samples() == b.samples());
    for (std::size_t i = 0; i < a.samples(); ++i)
      for (std::size_t d = 0; d < 2; ++d) CHECK(a.points(i, d) == b.points(i, d));
    if (a.has_controls()) {
      REQUIRE(b.has_controls());
      for (std::size_t i = 0; i < a.intervals(); ++i)
        for (std::size_t u = 0; u < 2; ++u) CHECK(a.controls(i, u) == b.controls(i, u));
    }
  }
}

TEST_CASE("family directory serialization round-trips") {
  const auto dir = scratch_dir("family");
  TorusModel circle{1, 1.0};
  const auto space = space_from_points(
      circle_grid(8), [&](const double* a, const double* b) { return circle.dist(a, b); });
  std::vector<std::size_t> dbl(8);
  for (std::size_t i = 0; i < 8; ++i) dbl[i] = (2 * i) % 8;
  const auto fam = bowen_family(space, dbl, 3);
  save_family(fam, (dir / "fam").string(), 42, "unit test");
  const auto back = load_family((dir / "fam").string());
  CHECK(back.base_kind == fam.base_kind);
  REQUIRE(back.grid == fam.grid);
  for (std::size_t g = 0; g < fam.levels(); ++g)
    for (std::size_t i = 0; i < fam.size(); ++i)
      for (std::size_t j = 0; j < fam.size(); ++j)
        CHECK(back.matrices[g](i, j) == fam.matrices[g](i, j));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dynent/accessibility.hpp"
#include "dynent/control.hpp"
#include "dynent/curve.hpp"
#include "dynent/manifold.hpp"
#include "dynent/systems.hpp"

using namespace dynent;

namespace {

const TorusModel kCircle{1, 1.0};
const TorusModel kTorus2{2, 1.0};

Mat row_controls(std::vector<std::vector<double>> rows) {
  Mat m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

TEST_CASE("zero radius bundle holds only the constant curve") {
  const auto sys = torus_full_rank_system(kTorus2);
  const double x[2] = {0.25, 0.5};
  const auto bundle = sample_bounded_curves(sys, x, 0, 0.0, 8, 8, 42);
  REQUIRE(bundle.curves.size() == 1);
  for (std::size_t i = 0; i < bundle.curves[0].samples(); ++i) {
    CHECK(bundle.curves[0].points(i, 0) == x[0]);
    CHECK(bundle.curves[0].points(i, 1) == x[1]);
  }
  CHECK_THROWS_AS(sample_bounded_curves(sys, x, 0, -1.0, 8, 8, 42), Error);
}

TEST_CASE("constant control moves arc distance r along the circle") {
  const auto sys = torus_line_system(kTorus2, 0.0);  // pure x-motion
  const double x[2] = {0.1, 0.2};
  const double r = 0.3;
  const Curve c = integrate_controls(sys, x, row_controls({{r}}));
  CHECK(c.points(c.samples() - 1, 0) == doctest::Approx(x[0] + r).epsilon(1e-10));
  CHECK(c.points(c.samples() - 1, 1) == doctest::Approx(x[1]).epsilon(1e-12));
}

TEST_CASE("square control loop realizes the bracket displacement") {
  TorusModel t3{3, 1.0};
  const auto sys = heisenberg_system(t3);
  const double a = 1.0;
  const double x[3] = {0.2, 0.3, 0.4};
  const Curve c = integrate_controls(
      sys, x, row_controls({{a, 0.0}, {0.0, a}, {-a, 0.0}, {0.0, -a}}),
      SampleOptions{65, 1e-2});
  const double* endp = c.end();
  CHECK(endp[0] == doctest::Approx(x[0]).epsilon(1e-9));
  CHECK(endp[1] == doctest::Approx(x[1]).epsilon(1e-9));
  // area formula: z displacement equals the enclosed (a/4)^2
  CHECK(endp[2] - x[2] == doctest::Approx(a * a / 16.0).epsilon(1e-3));
}

TEST_CASE("sampled curves respect the speed bound and reproduce bit-for-bit") {
  const auto sys = torus_full_rank_system(kTorus2);
  const double x[2] = {0.0, 0.0};
  const auto b1 = sample_bounded_curves(sys, x, 0, 0.7, 12, 8, 2024);
  const auto b2 = sample_bounded_curves(sys, x, 0, 0.7, 12, 8, 2024);
  REQUIRE(b1.curves.size() == 13);
  for (std::size_t c = 0; c < b1.curves.size(); ++c) {
    CHECK(b1.curves[c].points == b2.curves[c].points);
    CHECK(curve_length(b1.curves[c], sys) <= 0.7 + 1e-12);
  }
  const auto b3 = sample_bounded_curves(sys, x, 0, 0.7, 12, 8, 2025);
  CHECK_FALSE(b3.curves[1].points == b1.curves[1].points);
}

TEST_CASE("curve length from the control trace") {
  const auto sys = torus_full_rank_system(kTorus2);
  const double x[2] = {0.0, 0.0};
  const Curve constant = Curve::constant(x, 2, 65);
  CHECK(curve_length(constant, sys) == 0.0);
  const Curve steady = integrate_controls(sys, x, row_controls({{0.5, 0.0}}));
  CHECK(curve_length(steady, sys) == doctest::Approx(0.5));
  const Curve twospeed = integrate_controls(sys, x, row_controls({{1.0, 0.0}, {3.0, 0.0}}));
  CHECK(curve_length(twospeed, sys) == doctest::Approx(2.0));
}

TEST_CASE("curve length resolves velocities when the trace is missing") {
  const auto sys = torus_full_rank_system(kTorus2);
  const double x[2] = {0.1, 0.6};
  Curve c = integrate_controls(sys, x, row_controls({{0.4, 0.2}, {-0.1, 0.3}}));
  const double with_trace = curve_length(c, sys);
  c.controls = Mat();
  CHECK(curve_length(c, sys) == doctest::Approx(with_trace).epsilon(1e-6));
}

TEST_CASE("curve length flags unresolvable velocities") {
  const auto sys = torus_line_system(kTorus2, 0.0);  // motion only along x
  Curve c;
  c.times = Curve::uniform_times(3);
  c.points = Mat(3, 2);
  c.points(1, 1) = 0.1;  // sideways jump, outside the generator span
  c.points(2, 1) = 0.2;
  CHECK_THROWS_AS(curve_length(c, sys), Error);
}

TEST_CASE("arc-length reparametrization") {
  const auto sys = torus_full_rank_system(kTorus2);
  const double x[2] = {0.0, 0.0};

  // constant-speed curve is unchanged up to grid interpolation
  const Curve steady = integrate_controls(sys, x, row_controls({{0.5, 0.0}}));
  const Curve re = arc_length_reparametrize(steady, sys);
  for (std::size_t i = 0; i < steady.samples(); ++i)
    CHECK(re.points(i, 0) == doctest::Approx(steady.points(i, 0)).epsilon(1e-9));

  // speeds (2, 0): output speed constant 1, same image
  const Curve stopgo = integrate_controls(sys, x, row_controls({{2.0, 0.0}, {0.0, 0.0}}));
  const Curve rs = arc_length_reparametrize(stopgo, sys);
  CHECK(curve_length(rs, sys) == doctest::Approx(1.0).epsilon(1e-9));
  Vec u(2);
  for (std::size_t i = 0; i < rs.intervals(); ++i) {
    u[0] = rs.controls(i, 0);
    u[1] = rs.controls(i, 1);
    CHECK(sys.norm(u) == doctest::Approx(1.0).epsilon(0.05));
  }
  CHECK(rs.end()[0] == doctest::Approx(stopgo.end()[0]).epsilon(1e-9));

  // random multi-segment curve: length preserved within 1%
  const auto bundle = sample_bounded_curves(sys, x, 0, 0.9, 6, 8, 7);
  for (std::size_t c = 1; c < bundle.curves.size(); ++c) {
    const double before = curve_length(bundle.curves[c], sys);
    const Curve after = arc_length_reparametrize(bundle.curves[c], sys);
    CHECK(curve_length(after, sys) == doctest::Approx(before).epsilon(0.01));
    Vec uu(2);
    for (std::size_t i = 1; i + 1 < after.intervals(); ++i) {
      uu[0] = after.controls(i, 0);
      uu[1] = after.controls(i, 1);
      CHECK(sys.norm(uu) == doctest::Approx(before).epsilon(0.05));
    }
  }

  const Curve still = Curve::constant(x, 2, 65);
  CHECK_THROWS_AS(arc_length_reparametrize(still, sys), Error);
}

TEST_CASE("concatenation adds lengths, restriction shrinks them") {
  const auto sys = torus_full_rank_system(kTorus2);
  const double x[2] = {0.0, 0.0};
  const Curve a = integrate_controls(sys, x, row_controls({{0.3, 0.1}}));
  const Curve b = integrate_controls(sys, a.end(), row_controls({{-0.1, 0.2}}));

  const Curve ab = concatenate(a, b);
  CHECK(curve_length(ab, sys) ==
        doctest::Approx(curve_length(a, sys) + curve_length(b, sys)).epsilon(0.01));

  const Curve with_const = concatenate(a, Curve::constant(a.end(), 2, a.samples()));
  CHECK(curve_length(with_const, sys) == doctest::Approx(curve_length(a, sys)).epsilon(0.01));
  CHECK(with_const.end()[0] == doctest::Approx(a.end()[0]));

  const Curve full = restrict_subcurve(a, 0.0, 1.0);
  CHECK(full.points == a.points);
  const Curve half = restrict_subcurve(a, 0.0, 0.5);
  CHECK(curve_length(half, sys) == doctest::Approx(0.5 * curve_length(a, sys)).epsilon(0.02));

  CHECK_THROWS_AS(restrict_subcurve(a, 0.5, 0.5), Error);
  CHECK_THROWS_AS(restrict_subcurve(a, -0.1, 0.5), Error);
  Curve far_away = b;
  for (std::size_t i = 0; i < far_away.samples(); ++i) far_away.points(i, 0) += 10.0;
  CHECK_THROWS_AS(concatenate(a, far_away), Error);
}

TEST_CASE("quotient norm: invertible anchor reproduces the control norm") {
  const auto sys = torus_full_rank_system(kTorus2, ControlNorm::quadratic([] {
                                            Mat q(2, 2);
                                            q(0, 0) = 2.0;
                                            q(1, 1) = 0.5;
                                            return q;
                                          }()));
  const double x[2] = {0.3, 0.3};
  const Vec v{0.4, -0.2};
  CHECK(quotient_norm(sys, x, v) == doctest::Approx(sys.norm(v)).epsilon(1e-10));
  CHECK(quotient_norm(sys, x, Vec{0.0, 0.0}) == 0.0);
}

TEST_CASE("quotient norm minimizes over the kernel line") {
  // B = [1, 1] maps R^2 onto R; euclidean norm; v = 1 -> u = (1/2, 1/2)
  AnchoredSystem sys;
  sys.dim = 1;
  sys.control_dim = 2;
  sys.norm = ControlNorm::euclidean(2);
  sys.generators = [](const double*, Mat& b) {
    b(0, 0) = 1.0;
    b(0, 1) = 1.0;
  };
  sys.base_dist = [](const double* a, const double* b) { return std::abs(a[0] - b[0]); };
  const double x[1] = {0.0};
  const double got = quotient_norm(sys, x, Vec{1.0});
  CHECK(got == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));

  // grid-search oracle over the kernel line u = (t, 1 - t)
  double best = 1e300;
  for (double t = -2.0; t <= 3.0; t += 1e-4) {
    const double f = std::sqrt(t * t + (1.0 - t) * (1.0 - t));
    best = std::min(best, f);
  }
  CHECK(got == doctest::Approx(best).epsilon(1e-4));
}

TEST_CASE("quotient norm for a convex norm against grid search") {
  AnchoredSystem sys;
  sys.dim = 1;
  sys.control_dim = 2;
  sys.norm = ControlNorm::convex(2, [](const double* u, std::size_t) {
    return std::pow(std::pow(std::abs(u[0]), 4.0) + std::pow(std::abs(u[1]), 4.0), 0.25);
  });
  sys.generators = [](const double*, Mat& b) {
    b(0, 0) = 1.0;
    b(0, 1) = 1.0;
  };
  sys.base_dist = [](const double* a, const double* b) { return std::abs(a[0] - b[0]); };
  const double x[1] = {0.0};
  const double got = quotient_norm(sys, x, Vec{1.0});
  double best = 1e300;
  for (double t = -2.0; t <= 3.0; t += 1e-5) {
    const double u[2] = {t, 1.0 - t};
    best = std::min(best, sys.norm(u));
  }
  CHECK(got <= best * (1.0 + 1e-4) + 1e-12);
  CHECK(got >= best * (1.0 - 1e-4) - 1e-12);
}

TEST_CASE("quotient norm rejects vectors outside the range") {
  AnchoredSystem sys;
  sys.dim = 2;
  sys.control_dim = 1;
  sys.norm = ControlNorm::euclidean(1);
  sys.generators = [](const double*, Mat& b) {
    b(0, 0) = 1.0;
    b(1, 0) = 0.0;
  };
  sys.base_dist = [](const double* a, const double* b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
  };
  const double x[2] = {0.0, 0.0};
  CHECK_THROWS_AS(quotient_norm(sys, x, Vec{0.0, 1.0}), Error);
}

TEST_CASE("quotient norm is positively homogeneous") {
  const auto quad = torus_full_rank_system(kTorus2, ControlNorm::quadratic([] {
                                             Mat q(2, 2);
                                             q(0, 0) = 1.0;
                                             q(0, 1) = q(1, 0) = 0.2;
                                             q(1, 1) = 3.0;
                                             return q;
                                           }()));
  const double x[2] = {0.0, 0.0};
  const Vec v{0.3, 0.7};
  const double f1 = quotient_norm(quad, x, v);
  for (double t : {0.5, 2.0, 7.0}) {
    Vec tv = v;
    for (auto& c : tv) c *= t;
    CHECK(quotient_norm(quad, x, tv) == doctest::Approx(t * f1).epsilon(1e-6));
  }

  AnchoredSystem conv;
  conv.dim = 1;
  conv.control_dim = 2;
  conv.norm = ControlNorm::convex(2, [](const double* u, std::size_t) {
    return std::pow(std::pow(std::abs(u[0]), 4.0) + std::pow(std::abs(u[1]), 4.0), 0.25);
  });
  conv.generators = [](const double*, Mat& b) {
    b(0, 0) = 1.0;
    b(0, 1) = 2.0;
  };
  conv.base_dist = [](const double* a, const double* b) { return std::abs(a[0] - b[0]); };
  const double y[1] = {0.0};
  const double g1 = quotient_norm(conv, y, Vec{1.0});
  for (double t : {0.5, 3.0}) {
    CHECK(quotient_norm(conv, y, Vec{t}) == doctest::Approx(t * g1).epsilon(1e-3));
  }
}

TEST_CASE("minkowski check on quadratic norms") {
  Mat dirs(3, 2);
  dirs(0, 0) = 1.0;
  dirs(1, 1) = 1.0;
  dirs(2, 0) = dirs(2, 1) = std::sqrt(0.5);
  const auto euclid = minkowski_check(ControlNorm::euclidean(2), dirs);
  CHECK(euclid.pass);
  for (const auto& row : euclid.rows) CHECK(row.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-4));

  Mat q(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = 4.0;
  const auto aniso = minkowski_check(ControlNorm::quadratic(q), dirs);
  CHECK(aniso.pass);
  for (const auto& row : aniso.rows)
    CHECK(row.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("minkowski check fails an under-smoothed l1-like profile") {
  // p < 1 is the l1 profile pushed past convexity; its definiteness breaks
  // just off the axes where the sublevel sets cave in
  const double p = 0.7;
  const auto norm = ControlNorm::convex(2, [p](const double* u, std::size_t) {
    return std::pow(std::pow(std::abs(u[0]), p) + std::pow(std::abs(u[1]), p), 1.0 / p);
  });
  Mat dirs(2, 2);
  dirs(0, 0) = 1.0;
  dirs(0, 1) = 0.05;
  dirs(1, 0) = 0.05;
  dirs(1, 1) = 1.0;
  const auto rep = minkowski_check(norm, dirs);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("minkowski check reports a degenerate direction") {
  const auto norm = ControlNorm::convex(2, [](const double* u, std::size_t) {
    return 0.5 * std::abs(u[0] + u[1]);
  });
  Mat dirs(1, 2);
  dirs(0, 0) = 1.0;
  dirs(0, 1) = -1.0;
  CHECK_THROWS_AS(minkowski_check(norm, dirs), Error);
}

TEST_CASE("accessibility partition: controllable torus collapses to one class") {
  const auto sys = torus_full_rank_system(kTorus2);
  const Mat coords = kTorus2.grid_sample(4);
  ProbeOptions opt;
  opt.r_probe = 0.8;
  opt.n_probe = 16;
  opt.eps_link = 0.08;
  const auto labels = accessibility_partition(sys, coords, 99, opt);
  for (int l : labels) CHECK(l == 0);
}

TEST_CASE("accessibility partition: zero generators give singleton classes") {
  AnchoredSystem sys = torus_full_rank_system(kTorus2);
  sys.generators = [](const double*, Mat& b) {
    b(0, 0) = b(0, 1) = b(1, 0) = b(1, 1) = 0.0;
  };
  const Mat coords = kTorus2.grid_sample(3);
  ProbeOptions opt;
  opt.r_probe = 0.5;
  opt.n_probe = 4;
  opt.eps_link = 0.05;
  const auto labels = accessibility_partition(sys, coords, 7, opt);
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(labels[i] == static_cast<int>(i));
}

TEST_CASE("accessibility partition requires symmetric controls") {
  auto sys = torus_full_rank_system(kTorus2);
  sys.symmetric_controls = false;
  ProbeOptions opt;
  CHECK_THROWS_AS(accessibility_partition(sys, kTorus2.grid_sample(2), 1, opt), Error);
}

TEST_CASE("sphere latitude partition matches the ring labels exactly") {
  SphereModel sphere{1.0};
  const auto ring = sphere.ring_sample(5, 8);
  const auto sys = sphere_azimuthal_system(sphere);
  ProbeOptions opt;
  opt.r_probe = 4.0;
  opt.n_probe = 12;
  opt.eps_link = 0.05;
  const auto labels = accessibility_partition(sys, ring.points, 31, opt);
  REQUIRE(labels.size() == ring.ring_label.size());
  // both labelings are canonical by first occurrence, so they must be equal
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(labels[i] == ring.ring_label[i]);
}

TEST_CASE("accessibility partition is stable under sample permutation") {
  SphereModel sphere{1.0};
  const auto ring = sphere.ring_sample(4, 6);
  const auto sys = sphere_azimuthal_system(sphere);
  ProbeOptions opt;
  opt.r_probe = 4.0;
  opt.n_probe = 12;
  opt.eps_link = 0.05;
  const auto labels = accessibility_partition(sys, ring.points, 13, opt);

  const std::size_t n = ring.points.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = (i * 7 + 3) % n;  // 7 coprime to n
  Mat shuffled(n, 3);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) shuffled(i, c) = ring.points(perm[i], c);
  const auto labels2 = accessibility_partition(sys, shuffled, 13, opt);
  // same set partition up to the index permutation
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      CHECK((labels2[i] == labels2[j]) == (labels[perm[i]] == labels[perm[j]]));
}

TEST_CASE("admissible graph distance on the circle") {
  TorusModel circle{1, 1.0};
  // single unit generator along the circle
  auto sys = torus_line_system(kTorus2, 0.0);
  sys.dim = 1;
  sys.control_dim = 1;
  sys.generators = [](const double*, Mat& b) { b(0, 0) = 1.0; };
  TorusModel model = circle;
  sys.base_dist = [model](const double* a, const double* b) { return model.dist(a, b); };
  sys.displacement = [model](const double* a, const double* b, double* out) {
    model.displacement(a, b, out);
  };
  const Mat coords = circle_grid(16);
  ProbeOptions opt;
  opt.r_probe = 1.2;
  opt.n_probe = 24;
  opt.eps_link = 0.04;
  const auto bundles = probe_bundles(sys, coords, 17, opt);
  CHECK(admissible_graph_distance(sys, coords, bundles, 3, 3, opt) == 0.0);
  const double anti = admissible_graph_distance(sys, coords, bundles, 0, 8, opt);
  CHECK(anti == doctest::Approx(0.5).epsilon(0.10));
  CHECK(anti >= 0.5 - 1e-9);  // upper-biased estimate
}

TEST_CASE("admissible graph distance is infinite across latitude leaves") {
  SphereModel sphere{1.0};
  const auto ring = sphere.ring_sample(4, 6);
  const auto sys = sphere_azimuthal_system(sphere);
  ProbeOptions opt;
  opt.r_probe = 4.0;
  opt.n_probe = 8;
  opt.eps_link = 0.05;
  const auto bundles = probe_bundles(sys, ring.points, 11, opt);
  // point 1 lives on ring 1, the last point is the south pole
  const double cross =
      admissible_graph_distance(sys, ring.points, bundles, 1, ring.points.rows() - 1, opt);
  CHECK(std::isinf(cross));
}

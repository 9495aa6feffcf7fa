#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dynent/control.hpp"
#include "dynent/curve.hpp"
#include "dynent/errors.hpp"
#include "dynent/family.hpp"
#include "dynent/integrate.hpp"
#include "dynent/metric_space.hpp"
#include "dynent/parallel.hpp"

namespace dynent {

// Bowen family of a point map: d_n(x,y) = max over the first n iterates of
// the base distance. map_index must be total on the sample.
inline DistanceFamily bowen_family(const FiniteMetricSpace& s,
                                   const std::vector<std::size_t>& map_index,
                                   std::size_t n_max) {
  const std::size_t n = s.size();
  if (map_index.size() != n)
    throw Error(Errc::index_out_of_range, "map must be defined on every sample point");
  for (std::size_t i : map_index)
    if (i >= n) throw Error(Errc::index_out_of_range, "map image outside the sample");

  DistanceFamily f;
  f.base_kind = FamilyKind::map;
  f.grid.resize(n_max + 1);
  std::vector<std::size_t> iterate(n);
  for (std::size_t i = 0; i < n; ++i) iterate[i] = i;

  Mat cur = s.dist;
  for (std::size_t level = 0; level <= n_max; ++level) {
    f.grid[level] = static_cast<double>(level);
    if (level > 0) {
      for (std::size_t i = 0; i < n; ++i) iterate[i] = map_index[iterate[i]];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double v = s.dist(iterate[i], iterate[j]);
          if (v > cur(i, j)) {
            cur(i, j) = v;
            cur(j, i) = v;
          }
        }
    }
    f.matrices.push_back(cur);
  }
  return f;
}

// Partial point map on the sample; to[i] < 0 means undefined at i.
struct PartialMap {
  std::string name;
  std::vector<std::ptrdiff_t> to;
  std::size_t inverse = 0;  // index of the listed inverse

  bool defined(std::size_t i) const { return to[i] >= 0; }
};

// d_n(x,y) = sup over compositions of <= n generators, defined along the
// whole composition at both x and y, of d(g x, g y). The generator list must
// contain the identity and be closed under the listed inverses.
inline DistanceFamily pseudogroup_family(const FiniteMetricSpace& s,
                                         const std::vector<PartialMap>& generators,
                                         std::size_t n_max) {
  const std::size_t n = s.size();
  bool has_identity = false;
  for (const auto& g : generators) {
    if (g.to.size() != n)
      throw Error(Errc::index_out_of_range, "generator not defined over the sample");
    bool ident = true;
    for (std::size_t i = 0; i < n; ++i)
      if (g.to[i] != static_cast<std::ptrdiff_t>(i)) ident = false;
    has_identity = has_identity || ident;
  }
  if (!has_identity)
    throw Error(Errc::missing_identity, "generator list must contain the identity");
  for (const auto& g : generators) {
    if (g.inverse >= generators.size())
      throw Error(Errc::missing_inverse, "inverse index out of range for " + g.name);
    const auto& inv = generators[g.inverse];
    for (std::size_t i = 0; i < n; ++i)
      if (g.defined(i)) {
        const std::size_t img = static_cast<std::size_t>(g.to[i]);
        if (img >= n || !inv.defined(img) ||
            inv.to[img] != static_cast<std::ptrdiff_t>(i))
          throw Error(Errc::missing_inverse, "listed inverse of " + g.name + " does not invert it");
      }
  }

  DistanceFamily f;
  f.base_kind = FamilyKind::pseudogroup;
  f.grid.resize(n_max + 1);

  // words of length <= level, deduplicated by their partial-map table
  std::map<std::vector<std::ptrdiff_t>, bool> seen;
  std::vector<std::vector<std::ptrdiff_t>> frontier;
  {
    std::vector<std::ptrdiff_t> ident(n);
    for (std::size_t i = 0; i < n; ++i) ident[i] = static_cast<std::ptrdiff_t>(i);
    seen.emplace(ident, true);
    frontier.push_back(std::move(ident));
  }

  Mat cur = s.dist;  // identity is in Gamma_0, so d_0 = d
  f.grid[0] = 0.0;
  f.matrices.push_back(cur);

  for (std::size_t level = 1; level <= n_max; ++level) {
    std::vector<std::vector<std::ptrdiff_t>> next;
    for (const auto& w : frontier) {
      for (const auto& g : generators) {
        std::vector<std::ptrdiff_t> comp(n, -1);
        for (std::size_t i = 0; i < n; ++i)
          if (w[i] >= 0 && g.defined(static_cast<std::size_t>(w[i])))
            comp[i] = g.to[static_cast<std::size_t>(w[i])];
        auto [it, inserted] = seen.emplace(comp, true);
        if (inserted) next.push_back(std::move(comp));
      }
    }
    for (const auto& w : next)
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] < 0) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (w[j] < 0) continue;
          const double v =
              s.dist(static_cast<std::size_t>(w[i]), static_cast<std::size_t>(w[j]));
          if (v > cur(i, j)) {
            cur(i, j) = v;
            cur(j, i) = v;
          }
        }
      }
    frontier = std::move(next);
    f.grid[level] = static_cast<double>(level);
    f.matrices.push_back(cur);
  }
  return f;
}

// Flow family: d_r(x,y) = sup over the discrete time grid {0, dt, ...} up to
// r of the base distance between the integrated trajectories. r_grid must
// start at 0 and consist of multiples of dt.
template <class MetricFn, class FieldFn>
DistanceFamily flow_family(const FiniteMetricSpace& s, MetricFn&& metric, FieldFn&& field,
                           const std::vector<double>& r_grid, double dt,
                           double chart_bound = 1e9) {
  if (!s.has_coords()) throw Error(Errc::bad_interval, "flow family needs coordinates");
  if (r_grid.empty() || r_grid.front() != 0.0)
    throw Error(Errc::grid_mismatch, "flow r_grid must start at 0");
  std::vector<std::size_t> steps(r_grid.size());
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    const double k = r_grid[g] / dt;
    steps[g] = static_cast<std::size_t>(std::llround(k));
    if (std::abs(k - static_cast<double>(steps[g])) > 1e-9)
      throw Error(Errc::grid_mismatch, "dt must divide every grid value");
  }

  const std::size_t n = s.size();
  const std::size_t dim = s.coords.cols();
  DistanceFamily f;
  f.base_kind = FamilyKind::flow;
  f.grid = r_grid;

  Mat pos = s.coords;
  Mat cur = s.dist;
  Vec work(5 * dim);
  std::size_t done = 0;
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    while (done < steps[g]) {
      for (std::size_t i = 0; i < n; ++i) {
        rk4_step(field, pos.row(i), dim, dt, work.data());
        for (std::size_t d = 0; d < dim; ++d)
          if (!std::isfinite(pos(i, d)) || std::abs(pos(i, d)) > chart_bound)
            throw Error(Errc::blow_up, "flow trajectory left the chart");
      }
      ++done;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double v = metric(pos.row(i), pos.row(j));
          if (v > cur(i, j)) {
            cur(i, j) = v;
            cur(j, i) = v;
          }
        }
    }
    f.matrices.push_back(cur);
  }
  return f;
}

// ---- curve-bundle families ----

// Nested bundle libraries: level l of the r_grid contributes per_level fresh
// curves at speed bound r_l, appended onto the previous level's list, so
// B(r_s) is a prefix of B(r_l) for s < l by construction. matched_library
// reuses the same control streams at every base point, which is the variance
// reduction that makes the sup-inf comparison structurally matched.
struct BundleBuildOptions {
  std::size_t per_level = 4;
  std::size_t n_segments = 8;
  SampleOptions sample;
  bool matched_library = true;
  unsigned workers = 1;
};

inline std::vector<std::vector<CurveBundle>> build_nested_bundles(
    const AnchoredSystem& sys, const Mat& coords, const std::vector<double>& r_grid,
    std::uint64_t seed, const BundleBuildOptions& opt = {}) {
  if (r_grid.empty() || r_grid.front() != 0.0)
    throw Error(Errc::grid_mismatch, "bundle r_grid must start at 0");
  const std::size_t n = coords.rows();
  std::vector<std::vector<CurveBundle>> out(n);
  parallel_for(n, opt.workers, [&](std::size_t p) {
    std::vector<CurveBundle> levels;
    levels.reserve(r_grid.size());
    CurveBundle acc;
    acc.base_index = p;
    acc.radius = 0.0;
    acc.curves.push_back(Curve::constant(coords.row(p), coords.cols(), opt.sample.n_samples));
    levels.push_back(acc);
    for (std::size_t l = 1; l < r_grid.size(); ++l) {
      const std::uint64_t level_seed = opt.matched_library ? derive_seed(seed, {l})
                                                           : derive_seed(seed, {p, l});
      CurveBundle fresh = sample_bounded_curves(sys, coords.row(p), p, r_grid[l], opt.per_level,
                                                opt.n_segments, level_seed, opt.sample);
      acc.radius = r_grid[l];
      for (std::size_t c = 1; c < fresh.curves.size(); ++c)
        acc.curves.push_back(std::move(fresh.curves[c]));
      levels.push_back(acc);
    }
    out[p] = std::move(levels);
  });
  return out;
}

// Length-filtered variant: speeds drawn up to speed_factor * r, the curve
// frozen once its accumulated length reaches r. Arbitrary speed profile,
// length <= r.
inline std::vector<std::vector<CurveBundle>> build_length_filtered_bundles(
    const AnchoredSystem& sys, const Mat& coords, const std::vector<double>& r_grid,
    std::uint64_t seed, const BundleBuildOptions& opt = {}, double speed_factor = 2.0) {
  if (r_grid.empty() || r_grid.front() != 0.0)
    throw Error(Errc::grid_mismatch, "bundle r_grid must start at 0");
  const std::size_t n = coords.rows();
  const std::size_t T = opt.sample.n_samples - 1;
  std::vector<std::vector<CurveBundle>> out(n);
  parallel_for(n, opt.workers, [&](std::size_t p) {
    std::vector<CurveBundle> levels;
    CurveBundle acc;
    acc.base_index = p;
    acc.radius = 0.0;
    acc.curves.push_back(Curve::constant(coords.row(p), coords.cols(), opt.sample.n_samples));
    levels.push_back(acc);
    Mat b(sys.dim, sys.control_dim);
    Vec work(5 * sys.dim), u(sys.control_dim);
    for (std::size_t l = 1; l < r_grid.size(); ++l) {
      const double r = r_grid[l];
      const std::uint64_t level_seed = opt.matched_library ? derive_seed(seed, {l})
                                                           : derive_seed(seed, {p, l});
      for (std::size_t c = 0; c < opt.per_level; ++c) {
        Rng rng(derive_seed(level_seed, {c}));
        Mat controls(opt.n_segments, sys.control_dim);
        Vec draw(sys.control_dim);
        for (std::size_t sgm = 0; sgm < opt.n_segments; ++sgm) {
          sys.norm.sample_in_ball(rng, speed_factor * r, draw);
          for (std::size_t j = 0; j < sys.control_dim; ++j) controls(sgm, j) = draw[j];
        }
        Curve cur;
        cur.times = Curve::uniform_times(opt.sample.n_samples);
        cur.points = Mat(opt.sample.n_samples, sys.dim);
        cur.controls = Mat(T, sys.control_dim);
        Vec pos(coords.row(p), coords.row(p) + sys.dim);
        for (std::size_t d = 0; d < sys.dim; ++d) cur.points(0, d) = pos[d];
        const double interval = 1.0 / static_cast<double>(T);
        const std::size_t per_seg = T / opt.n_segments;
        double budget = r;
        for (std::size_t i = 0; i < T; ++i) {
          const std::size_t seg = i / per_seg;
          for (std::size_t j = 0; j < sys.control_dim; ++j) u[j] = controls(seg, j);
          double speed = sys.norm(u);
          if (speed * interval > budget) {
            const double scale = speed > 0.0 ? budget / (speed * interval) : 0.0;
            for (auto& v : u) v *= scale;
            speed = sys.norm(u);
          }
          budget -= speed * interval;
          for (std::size_t j = 0; j < sys.control_dim; ++j) cur.controls(i, j) = u[j];
          auto field = [&](const double* q, double* dq) {
            sys.generators(q, b);
            for (std::size_t row = 0; row < sys.dim; ++row) {
              double sum = 0.0;
              for (std::size_t col = 0; col < sys.control_dim; ++col)
                sum += b(row, col) * u[col];
              dq[row] = sum;
            }
          };
          rk4_step(field, pos.data(), sys.dim, interval, work.data());
          for (std::size_t d = 0; d < sys.dim; ++d) cur.points(i + 1, d) = pos[d];
        }
        cur.speed_bound = speed_factor * r;
        acc.curves.push_back(std::move(cur));
      }
      acc.radius = r;
      levels.push_back(acc);
    }
    out[p] = std::move(levels);
  });
  return out;
}

// The sup-inf curve-set distance: delta_r(x,y) over the finite bundles, its
// symmetrization, and a running max across r. The running max repairs the
// downward bias of fresh Monte Carlo levels; every true d_{r_s} with s <= l
// lower-bounds d_{r_l}, so the max is the tighter lower estimate.
template <class MetricFn>
DistanceFamily curve_family(const Mat& coords, MetricFn&& metric,
                            const std::vector<double>& r_grid,
                            const std::vector<std::vector<CurveBundle>>& bundles,
                            unsigned workers = 1, double snap_tol = kSnapTol) {
  const std::size_t n = coords.rows();
  if (bundles.size() != n)
    throw Error(Errc::grid_mismatch, "one bundle list per base point required");
  for (std::size_t p = 0; p < n; ++p) {
    if (bundles[p].size() != r_grid.size())
      throw Error(Errc::grid_mismatch, "one bundle per grid value required");
    for (std::size_t l = 0; l < r_grid.size(); ++l) {
      const auto& bd = bundles[p][l];
      if (bd.curves.empty())
        throw Error(Errc::missing_constant_curve, "bundle without curves");
      const Curve& c0 = bd.curves.front();
      bool constant = true;
      for (std::size_t i = 0; i < c0.samples() && constant; ++i)
        for (std::size_t d = 0; d < c0.dim(); ++d)
          if (c0.points(i, d) != c0.points(0, d)) {
            constant = false;
            break;
          }
      if (!constant || metric(c0.start(), coords.row(p)) > snap_tol)
        throw Error(Errc::missing_constant_curve,
                    "bundle must begin with the constant curve at its base point");
      if (l > 0) {
        const auto& prev = bundles[p][l - 1];
        if (prev.curves.size() > bd.curves.size())
          throw Error(Errc::non_nested_bundles, "bundle shrank along the grid");
        for (std::size_t c = 0; c < prev.curves.size(); ++c) {
          const Curve& a = prev.curves[c];
          const Curve& b = bd.curves[c];
          if (a.samples() != b.samples() ||
              metric(a.end(), b.end()) > snap_tol ||
              metric(a.start(), b.start()) > snap_tol)
            throw Error(Errc::non_nested_bundles, "bundles are not prefix-nested");
        }
      }
    }
  }

  DistanceFamily f;
  f.base_kind = FamilyKind::curve_bundle;
  f.grid = r_grid;
  const std::size_t L = r_grid.size();
  for (std::size_t l = 0; l < L; ++l) f.matrices.emplace_back(n, n, 0.0);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) pairs.emplace_back(p, q);

  parallel_for(pairs.size(), workers, [&](std::size_t idx) {
    const auto [p, q] = pairs[idx];
    const auto& top_p = bundles[p].back().curves;
    const auto& top_q = bundles[q].back().curves;
    Mat table(top_p.size(), top_q.size());
    for (std::size_t a = 0; a < top_p.size(); ++a)
      for (std::size_t b = 0; b < top_q.size(); ++b)
        table(a, b) = uniform_curve_distance(top_p[a], top_q[b], metric);
    double running = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t np = bundles[p][l].curves.size();
      const std::size_t nq = bundles[q][l].curves.size();
      double delta_pq = 0.0;
      for (std::size_t a = 0; a < np; ++a) {
        double inner = table(a, 0);
        for (std::size_t b = 1; b < nq; ++b) inner = std::min(inner, table(a, b));
        delta_pq = std::max(delta_pq, inner);
      }
      double delta_qp = 0.0;
      for (std::size_t b = 0; b < nq; ++b) {
        double inner = table(0, b);
        for (std::size_t a = 1; a < np; ++a) inner = std::min(inner, table(a, b));
        delta_qp = std::max(delta_qp, inner);
      }
      running = std::max(running, delta_pq + delta_qp);
      f.matrices[l](p, q) = running;
      f.matrices[l](q, p) = running;
    }
  });
  return f;
}

}  // namespace dynent

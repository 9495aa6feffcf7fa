#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dynent/errors.hpp"
#include "dynent/matrix.hpp"
#include "dynent/metric_space.hpp"

namespace dynent {

enum class FamilyKind { map, pseudogroup, flow, curve_bundle, synthetic };

inline const char* family_kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::map: return "map";
    case FamilyKind::pseudogroup: return "pseudogroup";
    case FamilyKind::flow: return "flow";
    case FamilyKind::curve_bundle: return "curve_bundle";
    case FamilyKind::synthetic: return "synthetic";
  }
  return "synthetic";
}

inline FamilyKind family_kind_from_name(const std::string& s) {
  if (s == "map") return FamilyKind::map;
  if (s == "pseudogroup") return FamilyKind::pseudogroup;
  if (s == "flow") return FamilyKind::flow;
  if (s == "curve_bundle") return FamilyKind::curve_bundle;
  if (s == "synthetic") return FamilyKind::synthetic;
  throw Error(Errc::io_error, "unknown family kind " + s);
}

// A family of increasing distances, one dense matrix per grid value.
// Anything with grid()/size()/distance(g,i,j)/kind() can stand in for this in
// the counting and estimation templates; this dense form is the one that
// round-trips through files.
struct DistanceFamily {
  std::vector<double> grid;
  std::vector<Mat> matrices;
  FamilyKind base_kind = FamilyKind::synthetic;

  std::size_t levels() const { return grid.size(); }
  std::size_t size() const { return matrices.empty() ? 0 : matrices.front().rows(); }
  const std::vector<double>& lambda_grid() const { return grid; }
  FamilyKind kind() const { return base_kind; }
  double distance(std::size_t g, std::size_t i, std::size_t j) const {
    return matrices[g](i, j);
  }
};

// Grid values multiplied by c, matrices untouched. Under the estimator this
// divides every growth slope by c.
inline DistanceFamily reindex_scale(const DistanceFamily& f, double c) {
  if (!(c > 0.0)) throw Error(Errc::non_positive_scale, "reindex scale must be positive");
  DistanceFamily out = f;
  for (auto& g : out.grid) g *= c;
  return out;
}

struct FamilyCheckOptions {
  double tol = 1e-7;
  bool full_triangle = true;        // O(n^3) per level; disable for big spaces
  std::size_t sampled_triples = 20000;
  std::uint64_t sample_seed = 17;
};

// Validates the family invariants: every matrix is a metric at tolerance,
// the family is entrywise monotone in the grid parameter, the grid ascends,
// and the kind-specific base conditions hold when a base metric is supplied
// (d_0 = d for map/pseudogroup/flow, d_r >= 2 d for curve bundles).
inline std::vector<std::string> validate_family(const DistanceFamily& f, const Mat* base = nullptr,
                                                const FamilyCheckOptions& opt = {}) {
  std::vector<std::string> problems;
  if (f.grid.size() != f.matrices.size()) {
    problems.push_back("grid/matrix count mismatch");
    return problems;
  }
  for (std::size_t g = 0; g + 1 < f.grid.size(); ++g)
    if (!(f.grid[g] < f.grid[g + 1]))
      problems.push_back("grid not strictly ascending at index " + std::to_string(g));
  for (std::size_t g = 0; g < f.matrices.size(); ++g) {
    const auto viol = opt.full_triangle
                          ? validate_metric(f.matrices[g], opt.tol)
                          : validate_metric_sampled(f.matrices[g], opt.tol, opt.sampled_triples,
                                                    opt.sample_seed);
    if (!viol.empty())
      problems.push_back("level " + std::to_string(g) + ": " + viol.front().describe() + " (+" +
                         std::to_string(viol.size() - 1) + " more)");
  }
  const std::size_t n = f.size();
  for (std::size_t g = 0; g + 1 < f.matrices.size(); ++g)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (f.matrices[g + 1](i, j) < f.matrices[g](i, j) - opt.tol) {
          problems.push_back("not entrywise monotone at level " + std::to_string(g) + " entry (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
          g = f.matrices.size();  // one message is enough
          break;
        }
  if (base) {
    if (f.base_kind == FamilyKind::curve_bundle) {
      for (std::size_t g = 0; g < f.matrices.size(); ++g)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            if (f.matrices[g](i, j) < 2.0 * (*base)(i, j) - opt.tol) {
              problems.push_back("curve family entry below 2*base at level " + std::to_string(g));
              g = f.matrices.size();
              break;
            }
    } else if (!f.matrices.empty() && !f.grid.empty() && f.grid.front() == 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (std::abs(f.matrices.front()(i, j) - (*base)(i, j)) > opt.tol) {
            problems.push_back("level 0 differs from the base metric");
            i = n;
            break;
          }
    }
  }
  return problems;
}

// Lazy Bowen family: stores orbit positions instead of n x n matrices, so it
// scales to samples where a dense matrix would not fit. distance(g,i,j) is
// the running max of the base metric along the first g iterates.
template <class MetricFn>
struct OrbitFamily {
  std::vector<double> grid;  // {0, 1, ..., n_max}
  Mat orbits;                // row i: positions of iterates 0..n_max, dim each
  std::size_t point_dim = 0;
  MetricFn metric;
  FamilyKind base_kind = FamilyKind::map;

  std::size_t levels() const { return grid.size(); }
  std::size_t size() const { return orbits.rows(); }
  const std::vector<double>& lambda_grid() const { return grid; }
  FamilyKind kind() const { return base_kind; }

  double distance(std::size_t g, std::size_t i, std::size_t j) const {
    const double* oi = orbits.row(i);
    const double* oj = orbits.row(j);
    double m = 0.0;
    for (std::size_t s = 0; s <= g; ++s) {
      const double v = metric(oi + s * point_dim, oj + s * point_dim);
      if (v > m) m = v;
    }
    return m;
  }
};

// Orbit family from coordinates and a point map acting on them.
template <class MetricFn, class MapFn>
OrbitFamily<MetricFn> orbit_bowen_family(const Mat& coords, MetricFn metric, MapFn&& map,
                                         std::size_t n_max) {
  OrbitFamily<MetricFn> fam{{}, Mat(coords.rows(), (n_max + 1) * coords.cols()), coords.cols(),
                            std::move(metric), FamilyKind::map};
  fam.grid.resize(n_max + 1);
  for (std::size_t g = 0; g <= n_max; ++g) fam.grid[g] = static_cast<double>(g);
  const std::size_t dim = coords.cols();
  Vec cur(dim), next(dim);
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) cur[d] = coords(i, d);
    for (std::size_t s = 0; s <= n_max; ++s) {
      for (std::size_t d = 0; d < dim; ++d) fam.orbits(i, s * dim + d) = cur[d];
      if (s < n_max) {
        map(cur.data(), next.data());
        cur = next;
      }
    }
  }
  return fam;
}

// Product family with the max metric; factors must share the same grid.
// Flat index (ia, ib) -> ia * b.size() + ib, matching max_combine.
template <class FA, class FB>
struct ProductMaxFamily {
  const FA* a = nullptr;
  const FB* b = nullptr;

  std::size_t levels() const { return a->levels(); }
  std::size_t size() const { return a->size() * b->size(); }
  const std::vector<double>& lambda_grid() const { return a->lambda_grid(); }
  FamilyKind kind() const { return FamilyKind::synthetic; }

  double distance(std::size_t g, std::size_t i, std::size_t j) const {
    const std::size_t nb = b->size();
    const double da = a->distance(g, i / nb, j / nb);
    const double db = b->distance(g, i % nb, j % nb);
    return da > db ? da : db;
  }
};

template <class FA, class FB>
ProductMaxFamily<FA, FB> product_family(const FA& a, const FB& b) {
  if (a.lambda_grid().size() != b.lambda_grid().size())
    throw Error(Errc::grid_mismatch, "product factors need matching grids");
  for (std::size_t g = 0; g < a.lambda_grid().size(); ++g)
    if (std::abs(a.lambda_grid()[g] - b.lambda_grid()[g]) > 1e-12)
      throw Error(Errc::grid_mismatch, "product factors need matching grids");
  return ProductMaxFamily<FA, FB>{&a, &b};
}

// d_lambda = min(e^{a lambda + b} d, cap); the capped exponential blow-up of
// a base metric, used to exercise the finiteness bound.
inline DistanceFamily synthetic_exp_family(const FiniteMetricSpace& s, double a,
                                           const std::vector<double>& grid, double b = 0.0,
                                           double cap = -1.0) {
  DistanceFamily f;
  f.base_kind = FamilyKind::synthetic;
  f.grid = grid;
  const double diam = cap > 0.0 ? cap : s.diameter();
  const std::size_t n = s.size();
  for (double lam : grid) {
    Mat m(n, n);
    const double scale = std::exp(a * lam + b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m(i, j) = i == j ? 0.0 : std::min(scale * s.dist(i, j), diam);
    f.matrices.push_back(std::move(m));
  }
  return f;
}

// Materializes any family-like object into the dense form.
template <class Fam>
DistanceFamily densify(const Fam& f) {
  DistanceFamily out;
  out.grid = f.lambda_grid();
  out.base_kind = f.kind();
  const std::size_t n = f.size();
  for (std::size_t g = 0; g < f.levels(); ++g) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = f.distance(g, i, j);
    out.matrices.push_back(std::move(m));
  }
  return out;
}

}  // namespace dynent

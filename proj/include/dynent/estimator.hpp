#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dynent/counting.hpp"
#include "dynent/errors.hpp"
#include "dynent/family.hpp"
#include "dynent/parallel.hpp"

namespace dynent {

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t window_begin = 0;  // grid indices, inclusive
  std::size_t window_end = 0;    // exclusive
  bool valid = false;
  bool constant_fallback = false;  // all counts equal, slope pinned to 0
};

// Ordinary least squares of y against x over [begin, end).
inline GrowthFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                         std::size_t begin, std::size_t end) {
  GrowthFit fit;
  fit.window_begin = begin;
  fit.window_end = end;
  const std::size_t m = end - begin;
  if (m < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / static_cast<double>(m));
  fit.valid = true;
  return fit;
}

struct EstimatorOptions {
  double fit_window_fraction = 0.5;
  // counts at or above this fraction of the sample size cannot grow further;
  // such cells are excluded from the fit (finite-sample saturation)
  double saturation_fraction = 0.25;
  unsigned workers = 1;
};

struct EpsRow {
  double eps = 0.0;
  std::vector<std::size_t> counts;   // greedy packing count per grid value
  std::vector<char> saturated;       // count reached the saturation threshold
  GrowthFit fit;
};

struct ClaimCheck {
  bool passed = false;
  std::string text;
};

struct EntropyReport {
  std::vector<double> lambda_grid;
  std::vector<double> eps_grid;  // descending
  std::vector<EpsRow> rows;
  double h_estimate = 0.0;
  std::optional<double> best_eps;       // eps realizing the max slope
  std::optional<double> half_sample_h;  // stability diagnostic for Monte Carlo families
  std::vector<std::string> diagnostics;
  std::optional<ClaimCheck> claim_check;
};

// Per-eps fit: least-squares slope of ln count against lambda over the
// trailing window of the unsaturated prefix. Saturated cells carry no growth
// information and are excluded; a family whose counts never move collapses to
// slope zero.
template <class Fam>
std::vector<EpsRow> growth_slopes(const Fam& fam, const std::vector<double>& eps_grid,
                                  const EstimatorOptions& opt = {}) {
  const std::size_t n = fam.size();
  const auto& grid = fam.lambda_grid();
  const std::size_t L = grid.size();
  if (L < 3) throw Error(Errc::window_too_small, "need at least 3 grid values to fit");
  if (n == 0) throw Error(Errc::empty_space, "empty family");

  const std::size_t sat_threshold =
      std::min<std::size_t>(n, std::max<std::size_t>(
                                   2, static_cast<std::size_t>(
                                          std::ceil(opt.saturation_fraction * static_cast<double>(n)))));

  std::vector<EpsRow> rows(eps_grid.size());
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    rows[e].eps = eps_grid[e];
    rows[e].counts.assign(L, 0);
    rows[e].saturated.assign(L, 0);
  }

  parallel_for(eps_grid.size() * L, opt.workers, [&](std::size_t cell) {
    const std::size_t e = cell / L;
    const std::size_t g = cell % L;
    const auto dist = [&fam, g](std::size_t i, std::size_t j) { return fam.distance(g, i, j); };
    const std::size_t c = greedy_packing_count(n, dist, eps_grid[e], sat_threshold);
    rows[e].counts[g] = c;
    rows[e].saturated[g] = (c >= sat_threshold) ? 1 : 0;
  });

  std::vector<double> xs(grid.begin(), grid.end());
  for (auto& row : rows) {
    std::vector<double> ys(L);
    for (std::size_t g = 0; g < L; ++g)
      ys[g] = std::log(static_cast<double>(std::max<std::size_t>(1, row.counts[g])));

    std::size_t prefix = 0;
    while (prefix < L && !row.saturated[prefix]) ++prefix;

    if (prefix >= 3) {
      std::size_t win = std::max<std::size_t>(
          3, static_cast<std::size_t>(std::llround(opt.fit_window_fraction *
                                                   static_cast<double>(prefix))));
      win = std::min(win, prefix);
      row.fit = ols_fit(xs, ys, prefix - win, prefix);
    } else {
      bool constant = true;
      for (std::size_t g = 1; g < L; ++g)
        if (row.counts[g] != row.counts[0]) constant = false;
      if (constant) {
        row.fit = ols_fit(xs, ys, 0, L);
        row.fit.constant_fallback = true;
      }
      // otherwise the cell is under-resolved: counts saturate before three
      // usable grid values exist; fit stays invalid
    }
  }
  return rows;
}

template <class Fam>
EntropyReport entropy_estimate(const Fam& fam, const std::vector<double>& eps_grid,
                               const EstimatorOptions& opt = {}) {
  EntropyReport rep;
  rep.lambda_grid = fam.lambda_grid();
  rep.eps_grid = eps_grid;
  rep.rows = growth_slopes(fam, eps_grid, opt);

  bool any = false;
  for (const auto& row : rep.rows) {
    if (!row.fit.valid) continue;
    if (!any || row.fit.slope > rep.h_estimate) {
      rep.h_estimate = row.fit.slope;
      rep.best_eps = row.eps;
    }
    any = true;
  }
  if (!any) {
    rep.h_estimate = 0.0;
    rep.diagnostics.push_back(
        "no resolvable cell: every eps saturates before three grid values; refine the grid");
  }

  // the per-eps slopes should not decrease as eps decreases; anything else
  // means the eps grid is under-resolved at this sample size
  double prev = -1e300;
  bool monotone = true;
  for (const auto& row : rep.rows) {
    if (!row.fit.valid) continue;
    const double tolerance = 0.05 + 2.0 * row.fit.residual_rms;
    if (row.fit.slope < prev - tolerance) monotone = false;
    prev = std::max(prev, row.fit.slope);
  }
  if (!monotone)
    rep.diagnostics.push_back("slope vs eps not monotone: treat the estimate as under-resolved");

  std::size_t invalid = 0;
  for (const auto& row : rep.rows)
    if (!row.fit.valid) ++invalid;
  if (invalid > 0)
    rep.diagnostics.push_back(std::to_string(invalid) +
                              " eps cell(s) saturated before the fit window; skipped");
  return rep;
}

// Entropy bound m*a for a space with covering dimension m and a family
// growing no faster than e^{a lambda + b} times the base metric.
inline double finiteness_bound(double m, double a) {
  if (m < 0.0 || a < 0.0) throw Error(Errc::negative_input, "finiteness bound needs m, a >= 0");
  return m * a;
}

struct EnvelopeCheck {
  bool ok = true;
  double max_violation = 0.0;  // max of d_lambda - e^{a lambda + b} d over entries
};

// Verifies d_lambda <= e^{a lambda + b} d entrywise before the bound is used.
template <class Fam>
EnvelopeCheck check_growth_envelope(const Fam& fam, const Mat& base, double a, double b,
                                    double tol = 1e-9) {
  EnvelopeCheck out;
  const std::size_t n = fam.size();
  const auto& grid = fam.lambda_grid();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double scale = std::exp(a * grid[g] + b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double gap = fam.distance(g, i, j) - scale * base(i, j);
        out.max_violation = std::max(out.max_violation, gap);
      }
  }
  out.ok = out.max_violation <= tol;
  return out;
}

struct BracketRow {
  double eps = 0.0;
  std::size_t exact_cover = 0;
  std::size_t exact_packing = 0;
  std::size_t exact_cover_half = 0;
  std::size_t greedy_packing = 0;
  bool ok = false;
};

// Exact-count bracket M(eps) <= N(eps) <= M(eps/2), plus the greedy packing
// sandwiched between the exact cover and the exact packing.
inline std::vector<BracketRow> bracket_check(const Mat& dist, const std::vector<double>& eps_grid,
                                             std::size_t size_limit = kExactSizeLimitDefault) {
  std::vector<BracketRow> rows;
  const std::size_t n = dist.rows();
  for (double eps : eps_grid) {
    BracketRow r;
    r.eps = eps;
    auto [c, p] = exact_counts(n, matrix_dist(dist), eps, size_limit);
    auto [ch, ph] = exact_counts(n, matrix_dist(dist), eps / 2.0, size_limit);
    (void)ph;
    r.exact_cover = c;
    r.exact_packing = p;
    r.exact_cover_half = ch;
    r.greedy_packing = greedy_packing_count(n, matrix_dist(dist), eps);
    r.ok = (c <= p) && (p <= ch) && (r.greedy_packing >= c) && (r.greedy_packing <= p);
    rows.push_back(r);
  }
  return rows;
}

struct PlateauResult {
  std::size_t pairs_checked = 0;
  std::size_t pairs_passed = 0;
  double pass_fraction = 1.0;
  std::vector<std::string> failures;
};

// Controllability plateau: once the budget r exceeds the admissible distance
// between two points, d_r must sit at or below twice that distance and stop
// growing. dhat is the (upper-biased) sampled admissible distance table.
inline PlateauResult plateau_check(const DistanceFamily& fam, const Mat& dhat,
                                   const std::vector<int>& partition, double margin,
                                   double tol_plateau) {
  for (int lbl : partition)
    if (lbl != partition.front())
      throw Error(Errc::not_controllable, "plateau check needs a single accessibility class");

  PlateauResult res;
  const std::size_t n = fam.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t first = fam.grid.size();
      for (std::size_t g = 0; g < fam.grid.size(); ++g)
        if (fam.grid[g] >= dhat(i, j) + margin) {
          first = g;
          break;
        }
      if (first == fam.grid.size()) continue;
      ++res.pairs_checked;
      bool ok = true;
      double lo = 1e300, hi = -1e300;
      for (std::size_t g = first; g < fam.grid.size(); ++g) {
        const double v = fam.matrices[g](i, j);
        if (v > 2.0 * dhat(i, j) + tol_plateau) ok = false;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > tol_plateau) ok = false;
      if (ok)
        ++res.pairs_passed;
      else if (res.failures.size() < 32)
        res.failures.push_back("pair (" + std::to_string(i) + "," + std::to_string(j) +
                               "): d_r up to " + std::to_string(hi) + " vs cap " +
                               std::to_string(2.0 * dhat(i, j) + tol_plateau));
    }
  res.pass_fraction = res.pairs_checked == 0
                          ? 1.0
                          : static_cast<double>(res.pairs_passed) /
                                static_cast<double>(res.pairs_checked);
  return res;
}

}  // namespace dynent

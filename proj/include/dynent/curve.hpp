#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "dynent/errors.hpp"
#include "dynent/matrix.hpp"

namespace dynent {

inline constexpr double kSnapTol = 1e-6;
inline constexpr std::size_t kDefaultCurveSamples = 65;

// A curve on [0,1], sampled on a uniform time grid. points rows are chart
// coordinates (kept unwrapped on quotient models so that interpolation and
// concatenation stay linear). controls, when present, holds the piecewise
// constant control vector per sample interval.
struct Curve {
  Vec times;                         // T+1 entries, 0 = t_0 < ... < t_T = 1
  Mat points;                        // (T+1) x dim
  Mat controls;                      // T x k, empty when no trace is recorded
  std::optional<double> speed_bound; // the r of the bundle this was drawn for

  std::size_t samples() const { return times.size(); }
  std::size_t intervals() const { return times.empty() ? 0 : times.size() - 1; }
  std::size_t dim() const { return points.cols(); }
  bool has_controls() const { return !controls.empty(); }

  const double* start() const { return points.row(0); }
  const double* end() const { return points.row(points.rows() - 1); }

  static Curve constant(const double* x, std::size_t dim, std::size_t n_samples) {
    Curve c;
    c.times = uniform_times(n_samples);
    c.points = Mat(n_samples, dim);
    for (std::size_t i = 0; i < n_samples; ++i)
      for (std::size_t d = 0; d < dim; ++d) c.points(i, d) = x[d];
    c.speed_bound = 0.0;
    return c;
  }

  static Vec uniform_times(std::size_t n_samples) {
    Vec t(n_samples);
    const double step = 1.0 / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) t[i] = static_cast<double>(i) * step;
    t.back() = 1.0;
    return t;
  }

  // linear interpolation at parameter t in [0,1]
  void eval(double t, double* out) const {
    const std::size_t T = intervals();
    double s = t * static_cast<double>(T);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= T) i = T - 1;
    const double frac = s - static_cast<double>(i);
    const double* a = points.row(i);
    const double* b = points.row(i + 1);
    for (std::size_t d = 0; d < dim(); ++d) out[d] = a[d] + frac * (b[d] - a[d]);
  }
};

inline bool same_time_grid(const Curve& a, const Curve& b, double tol = 1e-12) {
  if (a.times.size() != b.times.size()) return false;
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > tol) return false;
  return true;
}

// bar-d: sup over the shared time grid of the pointwise base distance.
template <class MetricFn>
double uniform_curve_distance(const Curve& a, const Curve& b, MetricFn&& metric) {
  if (!same_time_grid(a, b))
    throw Error(Errc::grid_mismatch, "uniform_curve_distance needs equal time grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples(); ++i)
    m = std::max(m, static_cast<double>(metric(a.points.row(i), b.points.row(i))));
  return m;
}

// Concatenation, reparametrized back onto [0,1]: a on [0,1/2], b on [1/2,1].
// Controls double because time compresses by two.
template <class MetricFn>
Curve concatenate(const Curve& a, const Curve& b, MetricFn&& metric, double tol = kSnapTol) {
  if (a.samples() != b.samples())
    throw Error(Errc::grid_mismatch, "concatenate needs equal sample counts");
  if (metric(a.end(), b.start()) > tol)
    throw Error(Errc::endpoint_mismatch, "concatenate: a(1) != b(0)");
  const std::size_t T = a.intervals();
  Curve out;
  out.times = Curve::uniform_times(2 * T + 1);
  out.points = Mat(2 * T + 1, a.dim());
  for (std::size_t i = 0; i <= T; ++i)
    for (std::size_t d = 0; d < a.dim(); ++d) out.points(i, d) = a.points(i, d);
  // continue from a's endpoint so unwrapped charts stay continuous
  for (std::size_t i = 1; i <= T; ++i)
    for (std::size_t d = 0; d < a.dim(); ++d)
      out.points(T + i, d) = a.points(T, d) + (b.points(i, d) - b.points(0, d));
  if (a.has_controls() && b.has_controls() && a.controls.cols() == b.controls.cols()) {
    out.controls = Mat(2 * T, a.controls.cols());
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t u = 0; u < a.controls.cols(); ++u) {
        out.controls(i, u) = 2.0 * a.controls(i, u);
        out.controls(T + i, u) = 2.0 * b.controls(i, u);
      }
  }
  if (a.speed_bound && b.speed_bound)
    out.speed_bound = 2.0 * std::max(*a.speed_bound, *b.speed_bound);
  return out;
}

inline Curve concatenate(const Curve& a, const Curve& b, double tol = kSnapTol) {
  auto d = [&](const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
    return std::sqrt(s);
  };
  return concatenate(a, b, d, tol);
}

// Restriction to [t0, t1], reparametrized onto [0,1] with the same sample
// count. Restricting to [0,1] reproduces the curve exactly.
inline Curve restrict_subcurve(const Curve& c, double t0, double t1) {
  if (!(0.0 <= t0 && t0 < t1 && t1 <= 1.0))
    throw Error(Errc::bad_interval, "restrict_subcurve needs 0 <= t0 < t1 <= 1");
  const std::size_t n = c.samples();
  const std::size_t T = c.intervals();
  Curve out;
  out.times = Curve::uniform_times(n);
  out.points = Mat(n, c.dim());
  Vec tmp(c.dim());
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * out.times[i];
    c.eval(t, tmp.data());
    for (std::size_t d = 0; d < c.dim(); ++d) out.points(i, d) = tmp[d];
  }
  if (c.has_controls()) {
    out.controls = Mat(T, c.controls.cols());
    for (std::size_t i = 0; i < T; ++i) {
      const double mid = t0 + (t1 - t0) * 0.5 * (out.times[i] + out.times[i + 1]);
      std::size_t src = static_cast<std::size_t>(mid * static_cast<double>(T));
      if (src >= T) src = T - 1;
      for (std::size_t u = 0; u < c.controls.cols(); ++u)
        out.controls(i, u) = (t1 - t0) * c.controls(src, u);
    }
  }
  if (c.speed_bound) out.speed_bound = *c.speed_bound * (t1 - t0);
  return out;
}

// The finite sample of the curve set A_r(x): base point, budget r, curves
// with the constant curve first.
struct CurveBundle {
  std::size_t base_index = 0;
  double radius = 0.0;
  std::vector<Curve> curves;
};

}  // namespace dynent

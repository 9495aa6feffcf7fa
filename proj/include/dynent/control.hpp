#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dynent/curve.hpp"
#include "dynent/errors.hpp"
#include "dynent/integrate.hpp"
#include "dynent/matrix.hpp"
#include "dynent/rng.hpp"

namespace dynent {

// Norm on the control space: either sqrt(u^T Q u) for an SPD Q, or a general
// positively homogeneous convex callable.
class ControlNorm {
 public:
  static ControlNorm quadratic(Mat q, std::string label = "quadratic") {
    ControlNorm n;
    n.kind_ = Kind::quadratic;
    n.dim_ = q.rows();
    n.label_ = std::move(label);
    SymEigen e = sym_eigen(q);
    for (double w : e.values)
      if (w <= 0.0)
        throw Error(Errc::negative_input, "quadratic control norm needs a positive definite Q");
    n.q_ = std::move(q);
    n.ball_map_ = inv_sqrt_sym(n.q_);
    n.min_sphere_ = std::sqrt(e.values.front());
    return n;
  }

  static ControlNorm euclidean(std::size_t k) { return quadratic(Mat::identity(k), "euclidean"); }

  static ControlNorm convex(std::size_t k, std::function<double(const double*, std::size_t)> f,
                            std::string label = "convex") {
    ControlNorm n;
    n.kind_ = Kind::convex;
    n.dim_ = k;
    n.fn_ = std::move(f);
    n.label_ = std::move(label);
    // spot-check positivity and homogeneity on a fixed probe set, and record
    // the minimum of F on the Euclidean sphere for rejection sampling bounds
    double min_f = 0.0;
    bool first = true;
    Rng rng(0x51a3c0de);
    Vec u(k), scaled(k);
    for (std::size_t p = 0; p < 64 + 2 * k; ++p) {
      if (p < 2 * k) {
        for (std::size_t i = 0; i < k; ++i) u[i] = 0.0;
        u[p / 2] = (p % 2) ? -1.0 : 1.0;
      } else {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          u[i] = rng.normal();
          s += u[i] * u[i];
        }
        s = std::sqrt(s);
        for (std::size_t i = 0; i < k; ++i) u[i] /= s;
      }
      const double f0 = n.fn_(u.data(), k);
      if (!(f0 > 0.0))
        throw Error(Errc::degenerate_direction, "convex norm vanishes on a probe direction");
      for (std::size_t i = 0; i < k; ++i) scaled[i] = 2.0 * u[i];
      if (std::abs(n.fn_(scaled.data(), k) - 2.0 * f0) > 1e-9 * (1.0 + f0))
        throw Error(Errc::negative_input, "convex norm is not positively homogeneous");
      min_f = first ? f0 : std::min(min_f, f0);
      first = false;
    }
    n.min_sphere_ = min_f;
    return n;
  }

  double operator()(const double* u) const {
    if (kind_ == Kind::quadratic) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) row += q_(i, j) * u[j];
        s += u[i] * row;
      }
      return std::sqrt(std::max(0.0, s));
    }
    return fn_(u, dim_);
  }
  double operator()(const Vec& u) const { return (*this)(u.data()); }

  // the norm lambda * F
  ControlNorm scaled(double lambda) const {
    if (lambda <= 0.0) throw Error(Errc::non_positive_scale, "norm scale must be positive");
    if (kind_ == Kind::quadratic) {
      Mat q = q_;
      for (auto& v : q.data()) v *= lambda * lambda;
      return quadratic(std::move(q), label_ + "*scaled");
    }
    auto base = fn_;
    return convex(
        dim_, [base, lambda](const double* u, std::size_t k) { return lambda * base(u, k); },
        label_ + "*scaled");
  }

  // Uniform draw from {u : F(u) <= r}. Quadratic norms map the Euclidean ball
  // through Q^{-1/2}; convex norms reject from the bounding Euclidean ball.
  void sample_in_ball(Rng& rng, double r, Vec& out) const {
    out.assign(dim_, 0.0);
    if (r == 0.0) return;
    Vec w(dim_);
    if (kind_ == Kind::quadratic) {
      draw_euclid_ball(rng, w);
      for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += ball_map_(i, j) * w[j];
        out[i] = r * s;
      }
      return;
    }
    const double bound = r / min_sphere_;
    for (int tries = 0; tries < 10000; ++tries) {
      draw_euclid_ball(rng, w);
      for (std::size_t i = 0; i < dim_; ++i) out[i] = bound * w[i];
      if ((*this)(out) <= r) return;
    }
    throw Error(Errc::degenerate_direction, "ball rejection sampling failed to accept");
  }

  std::size_t dim() const { return dim_; }
  bool is_quadratic() const { return kind_ == Kind::quadratic; }
  const Mat& q() const { return q_; }
  const std::string& label() const { return label_; }
  double min_on_sphere() const { return min_sphere_; }

 private:
  enum class Kind { quadratic, convex };

  void draw_euclid_ball(Rng& rng, Vec& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      w[i] = rng.normal();
      s += w[i] * w[i];
    }
    s = std::sqrt(s);
    const double rad = std::pow(rng.uniform(), 1.0 / static_cast<double>(dim_));
    const double f = (s > 0.0) ? rad / s : 0.0;
    for (std::size_t i = 0; i < dim_; ++i) w[i] *= f;
  }

  Kind kind_ = Kind::quadratic;
  std::size_t dim_ = 0;
  Mat q_, ball_map_;
  std::function<double(const double*, std::size_t)> fn_;
  std::string label_;
  double min_sphere_ = 1.0;
};

struct MinkowskiReport {
  struct Row {
    std::size_t dir_index;
    double min_eigenvalue;
  };
  std::vector<Row> rows;
  bool pass = true;
};

// Finite-difference Hessian of F^2/2 at each sampled direction; the norm is
// Minkowski iff the form is positive definite away from 0.
inline MinkowskiReport minkowski_check(const ControlNorm& norm, const Mat& sample_dirs,
                                       double h = 1e-4) {
  const std::size_t k = norm.dim();
  MinkowskiReport rep;
  Vec u(k), up(k);
  auto g = [&](const Vec& v) {
    const double f = norm(v);
    return 0.5 * f * f;
  };
  for (std::size_t s = 0; s < sample_dirs.rows(); ++s) {
    for (std::size_t i = 0; i < k; ++i) u[i] = sample_dirs(s, i);
    double mag = 0.0;
    for (double v : u) mag += v * v;
    if (mag == 0.0) continue;
    if (norm(u) <= 0.0)
      throw Error(Errc::degenerate_direction, "norm vanishes at a nonzero direction");
    Mat hess(k, k);
    const double g0 = g(u);
    for (std::size_t i = 0; i < k; ++i) {
      up = u;
      up[i] += h;
      const double gp = g(up);
      up[i] -= 2.0 * h;
      const double gm = g(up);
      hess(i, i) = (gp - 2.0 * g0 + gm) / (h * h);
      for (std::size_t j = i + 1; j < k; ++j) {
        up = u;
        up[i] += h;
        up[j] += h;
        const double gpp = g(up);
        up[j] -= 2.0 * h;
        const double gpm = g(up);
        up[i] -= 2.0 * h;
        const double gmm = g(up);
        up[j] += 2.0 * h;
        const double gmp = g(up);
        hess(i, j) = hess(j, i) = (gpp - gpm - gmp + gmm) / (4.0 * h * h);
      }
    }
    const double min_eig = sym_eigen(hess).values.front();
    rep.rows.push_back({s, min_eig});
    if (!(min_eig > 0.0)) rep.pass = false;
  }
  return rep;
}

// Anchored control system on a chart: k generator fields assembled into the
// matrix B(x) with columns the anchored images of the control basis, a norm
// on controls, and the chart's base metric.
struct AnchoredSystem {
  std::size_t dim = 0;
  std::size_t control_dim = 0;
  // fills B (dim x control_dim) at chart point x
  std::function<void(const double*, Mat&)> generators;
  ControlNorm norm = ControlNorm::euclidean(1);
  bool symmetric_controls = true;
  // base metric of the ambient model
  std::function<double(const double*, const double*)> base_dist;
  // chart-aware shortest displacement b - a (defaults to plain difference)
  std::function<void(const double*, const double*, double*)> displacement;
  double chart_bound = 1e9;

  void shortest_displacement(const double* a, const double* b, double* out) const {
    if (displacement) {
      displacement(a, b, out);
      return;
    }
    for (std::size_t c = 0; c < dim; ++c) out[c] = b[c] - a[c];
  }
};

struct QuotientNormOptions {
  double rank_rtol = 1e-10;    // rank threshold relative to the top eigenvalue
  double range_rtol = 1e-8;    // membership tolerance for v in range(B)
  int descent_iters = 200;     // coordinate descent budget for convex norms
  double descent_rtol = 1e-6;  // relative step stop
};

namespace detail {

// golden-section minimum of a 1-D convex function on [lo, hi]
template <class Fn>
double golden_min(Fn&& f, double lo, double hi, int iters = 60) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace detail

// F_D(x, v): the infimum of F over controls u with B(x) u = v. Quadratic
// norms solve the least-norm problem in closed form through a rank-revealing
// pseudoinverse; convex norms minimize over the affine solution set.
inline double quotient_norm(const AnchoredSystem& sys, const double* x, const Vec& v,
                            const QuotientNormOptions& opt = {}) {
  const std::size_t d = sys.dim, k = sys.control_dim;
  Mat b(d, k);
  sys.generators(x, b);

  double vnorm = 0.0;
  for (double c : v) vnorm += c * c;
  vnorm = std::sqrt(vnorm);
  if (vnorm == 0.0) return 0.0;

  Vec u(k, 0.0);
  if (sys.norm.is_quadratic()) {
    // u = Q^{-1} B^T (B Q^{-1} B^T)^+ v
    Mat qinv = pinv_sym(sys.norm.q(), opt.rank_rtol);
    Mat bq(d, k);  // B Q^{-1}
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < k; ++l) s += b(i, l) * qinv(l, j);
        bq(i, j) = s;
      }
    Mat gram(d, d);  // B Q^{-1} B^T
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < k; ++l) s += bq(i, l) * b(j, l);
        gram(i, j) = s;
      }
    const Vec y = matvec(pinv_sym(gram, opt.rank_rtol), v);
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += bq(i, j) * y[i];
      u[j] = s;
    }
  } else {
    // particular least-squares solution, then descend over the kernel
    Mat gram(d, d);  // B B^T
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < k; ++l) s += b(i, l) * b(j, l);
        gram(i, j) = s;
      }
    const Vec y = matvec(pinv_sym(gram, opt.rank_rtol), v);
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += b(i, j) * y[i];
      u[j] = s;
    }
  }

  // range membership
  Vec bu(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += b(i, j) * u[j];
    bu[i] = s;
  }
  double resid = 0.0;
  for (std::size_t i = 0; i < d; ++i) resid += (bu[i] - v[i]) * (bu[i] - v[i]);
  if (std::sqrt(resid) > opt.range_rtol * vnorm + 1e-14)
    throw Error(Errc::not_in_range, "vector not in the range of the generators");

  if (sys.norm.is_quadratic()) return sys.norm(u);

  // kernel basis of B from the small Gram matrix B^T B
  Mat btb(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < d; ++l) s += b(l, i) * b(l, j);
      btb(i, j) = s;
    }
  SymEigen e = sym_eigen(btb);
  const double cut = opt.rank_rtol * std::max(1e-300, e.values.back());
  std::vector<std::size_t> kernel;
  for (std::size_t i = 0; i < k; ++i)
    if (e.values[i] <= cut) kernel.push_back(i);
  if (kernel.empty()) return sys.norm(u);

  Vec w(kernel.size(), 0.0), cand(k);
  auto value = [&](const Vec& coeffs) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = u[j];
      for (std::size_t m = 0; m < kernel.size(); ++m) s += coeffs[m] * e.vectors(j, kernel[m]);
      cand[j] = s;
    }
    return sys.norm(cand);
  };
  double best = value(w);
  const double span = 4.0 * (sys.norm(u) + vnorm);
  for (int it = 0; it < opt.descent_iters; ++it) {
    const double before = best;
    for (std::size_t m = 0; m < kernel.size(); ++m) {
      Vec probe = w;
      const double t = detail::golden_min(
          [&](double s) {
            probe[m] = s;
            return value(probe);
          },
          w[m] - span, w[m] + span);
      w[m] = t;
      best = value(w);
    }
    if (std::abs(before - best) <= opt.descent_rtol * (std::abs(before) + 1e-30)) break;
  }
  return best;
}

inline double quotient_norm(const AnchoredSystem& sys, const Vec& x, const Vec& v,
                            const QuotientNormOptions& opt = {}) {
  return quotient_norm(sys, x.data(), v, opt);
}

// ---- bounded-curve sampling ----

struct SampleOptions {
  std::size_t n_samples = kDefaultCurveSamples;  // time grid size, T+1
  double dt = 1e-2;                              // integrator step upper bound
};

// Integrates gamma' = B(gamma) u from x with the piecewise constant controls
// given per segment; segments split [0,1] evenly and must divide the sample
// interval count.
inline Curve integrate_controls(const AnchoredSystem& sys, const double* x, const Mat& controls,
                                const SampleOptions& opt = {}) {
  const std::size_t n_segments = controls.rows();
  if (n_segments < 1) throw Error(Errc::bad_interval, "need at least one control segment");
  const std::size_t T = opt.n_samples - 1;
  if (T % n_segments != 0)
    throw Error(Errc::bad_interval, "n_segments must divide the sample interval count");
  const std::size_t per_seg = T / n_segments;
  const double interval = 1.0 / static_cast<double>(T);
  const std::size_t substeps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(interval / opt.dt - 1e-12)));
  const double h = interval / static_cast<double>(substeps);

  Mat b(sys.dim, sys.control_dim);
  Vec work(5 * sys.dim), u(sys.control_dim);

  Curve cur;
  cur.times = Curve::uniform_times(opt.n_samples);
  cur.points = Mat(opt.n_samples, sys.dim);
  cur.controls = Mat(T, sys.control_dim);
  Vec pos(x, x + sys.dim);
  for (std::size_t d = 0; d < sys.dim; ++d) cur.points(0, d) = pos[d];

  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t seg = i / per_seg;
    for (std::size_t j = 0; j < sys.control_dim; ++j) {
      u[j] = controls(seg, j);
      cur.controls(i, j) = u[j];
    }
    auto field = [&](const double* p, double* dp) {
      sys.generators(p, b);
      for (std::size_t row = 0; row < sys.dim; ++row) {
        double s = 0.0;
        for (std::size_t col = 0; col < sys.control_dim; ++col) s += b(row, col) * u[col];
        dp[row] = s;
      }
    };
    for (std::size_t s = 0; s < substeps; ++s) rk4_step(field, pos.data(), sys.dim, h, work.data());
    for (std::size_t d = 0; d < sys.dim; ++d) {
      if (!std::isfinite(pos[d]) || std::abs(pos[d]) > sys.chart_bound)
        throw Error(Errc::blow_up, "trajectory left the chart");
      cur.points(i + 1, d) = pos[d];
    }
  }
  return cur;
}

// Draws n_curves trajectories of gamma' = B(gamma) u with piecewise constant
// controls on n_segments equal subintervals, each control uniform in the
// F-ball of radius r. The constant curve comes first. Curve c consumes the
// stream derive_seed(seed, {c}), so a bundle is reproducible from its seed
// alone and independent of scheduling.
inline CurveBundle sample_bounded_curves(const AnchoredSystem& sys, const double* x,
                                         std::size_t base_index, double r, std::size_t n_curves,
                                         std::size_t n_segments, std::uint64_t seed,
                                         const SampleOptions& opt = {}) {
  if (r < 0.0) throw Error(Errc::negative_radius, "speed bound must be nonnegative");
  if (n_segments < 1) throw Error(Errc::bad_interval, "n_segments must be >= 1");
  const std::size_t T = opt.n_samples - 1;
  if (T % n_segments != 0)
    throw Error(Errc::bad_interval, "n_segments must divide the sample interval count");

  CurveBundle bundle;
  bundle.base_index = base_index;
  bundle.radius = r;
  bundle.curves.push_back(Curve::constant(x, sys.dim, opt.n_samples));
  if (r == 0.0) return bundle;

  Vec u(sys.control_dim);
  for (std::size_t c = 0; c < n_curves; ++c) {
    Rng rng(derive_seed(seed, {c}));
    Mat controls(n_segments, sys.control_dim);
    for (std::size_t s = 0; s < n_segments; ++s) {
      sys.norm.sample_in_ball(rng, r, u);
      for (std::size_t j = 0; j < sys.control_dim; ++j) controls(s, j) = u[j];
    }
    Curve cur = integrate_controls(sys, x, controls, opt);
    cur.speed_bound = r;
    bundle.curves.push_back(std::move(cur));
  }
  return bundle;
}

// Length of a curve: integral of F along the recorded control trace, or of
// the quotient norm of finite-difference velocities when no trace exists.
inline double curve_length(const Curve& c, const AnchoredSystem& sys) {
  const std::size_t T = c.intervals();
  double len = 0.0;
  if (c.has_controls()) {
    Vec u(c.controls.cols());
    for (std::size_t i = 0; i < T; ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) u[j] = c.controls(i, j);
      len += sys.norm(u) * (c.times[i + 1] - c.times[i]);
    }
    return len;
  }
  Vec v(sys.dim);
  for (std::size_t i = 0; i < T; ++i) {
    const double dt = c.times[i + 1] - c.times[i];
    sys.shortest_displacement(c.points.row(i), c.points.row(i + 1), v.data());
    for (auto& comp : v) comp /= dt;
    double f;
    try {
      f = quotient_norm(sys, c.points.row(i), v);
    } catch (const Error& e) {
      if (e.code() == Errc::not_in_range)
        throw Error(Errc::unresolvable_velocity,
                    "velocity not in the generator span at sample " + std::to_string(i));
      throw;
    }
    len += f * dt;
  }
  return len;
}

// Reparametrizes to constant speed: same image, speed F(u) == length a.e.
inline Curve arc_length_reparametrize(const Curve& c, const AnchoredSystem& sys) {
  const std::size_t T = c.intervals();
  Vec speeds(T);
  if (c.has_controls()) {
    Vec u(c.controls.cols());
    for (std::size_t i = 0; i < T; ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) u[j] = c.controls(i, j);
      speeds[i] = sys.norm(u);
    }
  } else {
    Vec v(sys.dim);
    for (std::size_t i = 0; i < T; ++i) {
      const double dt = c.times[i + 1] - c.times[i];
      sys.shortest_displacement(c.points.row(i), c.points.row(i + 1), v.data());
      for (auto& comp : v) comp /= dt;
      speeds[i] = quotient_norm(sys, c.points.row(i), v);
    }
  }
  Vec cum(T + 1, 0.0);
  for (std::size_t i = 0; i < T; ++i)
    cum[i + 1] = cum[i] + speeds[i] * (c.times[i + 1] - c.times[i]);
  const double total = cum.back();
  if (total <= 1e-12) throw Error(Errc::zero_length, "cannot reparametrize a zero-length curve");

  Curve out;
  out.times = Curve::uniform_times(c.samples());
  out.points = Mat(c.samples(), c.dim());
  if (c.has_controls()) out.controls = Mat(T, c.controls.cols());
  out.speed_bound = total;

  Vec tmp(c.dim());
  std::size_t seg = 0;
  Vec knots(T + 1);  // original parameter value reaching arc fraction j/T
  for (std::size_t j = 0; j <= T; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(T);
    while (seg < T && cum[seg + 1] < target - 1e-15 * total) ++seg;
    double t;
    if (speeds[seg] <= 0.0) {
      t = c.times[seg];
    } else {
      t = c.times[seg] + (target - cum[seg]) / speeds[seg];
      t = std::min(t, c.times[seg + 1]);
    }
    knots[j] = std::min(1.0, std::max(0.0, t));
    c.eval(knots[j], tmp.data());
    for (std::size_t d = 0; d < c.dim(); ++d) out.points(j, d) = tmp[d];
  }
  if (c.has_controls()) {
    const std::size_t k = c.controls.cols();
    Vec avg(k);
    for (std::size_t j = 0; j < T; ++j) {
      // time-weighted average of u over the covered span, rescaled so the
      // output speed is exactly the total length on every interval
      avg.assign(k, 0.0);
      const double lo = knots[j], hi = knots[j + 1];
      if (hi > lo) {
        for (std::size_t i = 0; i < T; ++i) {
          const double overlap =
              std::min(hi, c.times[i + 1]) - std::max(lo, c.times[i]);
          if (overlap <= 0.0) continue;
          for (std::size_t u = 0; u < k; ++u) avg[u] += overlap * c.controls(i, u);
        }
        for (auto& v : avg) v /= (hi - lo);
      }
      const double f = sys.norm(avg);
      const double scale = f > 1e-12 * total ? total / f : (hi - lo) * static_cast<double>(T);
      for (std::size_t u = 0; u < k; ++u) out.controls(j, u) = scale * avg[u];
    }
  }
  return out;
}

}  // namespace dynent

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dynent/errors.hpp"
#include "dynent/matrix.hpp"

namespace dynent {

// One classical 4th-order step of x' = f(x), f : void(const double* x, double* dx).
template <class FieldFn>
void rk4_step(FieldFn&& f, double* x, std::size_t dim, double h, double* work) {
  double* k1 = work;
  double* k2 = work + dim;
  double* k3 = work + 2 * dim;
  double* k4 = work + 3 * dim;
  double* xt = work + 4 * dim;

  f(x, k1);
  for (std::size_t d = 0; d < dim; ++d) xt[d] = x[d] + 0.5 * h * k1[d];
  f(xt, k2);
  for (std::size_t d = 0; d < dim; ++d) xt[d] = x[d] + 0.5 * h * k2[d];
  f(xt, k3);
  for (std::size_t d = 0; d < dim; ++d) xt[d] = x[d] + h * k3[d];
  f(xt, k4);
  for (std::size_t d = 0; d < dim; ++d)
    x[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
}

// Integrates x' = f(x) from x0 over n_steps of size h, recording every state
// including the initial one. Throws BlowUp on non-finite values.
template <class FieldFn>
Mat integrate_flow(FieldFn&& f, const double* x0, std::size_t dim, double h,
                   std::size_t n_steps) {
  Mat traj(n_steps + 1, dim);
  Vec x(x0, x0 + dim);
  Vec work(5 * dim);
  for (std::size_t d = 0; d < dim; ++d) traj(0, d) = x[d];
  for (std::size_t s = 0; s < n_steps; ++s) {
    rk4_step(f, x.data(), dim, h, work.data());
    for (std::size_t d = 0; d < dim; ++d) {
      if (!std::isfinite(x[d])) throw Error(Errc::blow_up, "trajectory left the chart");
      traj(s + 1, d) = x[d];
    }
  }
  return traj;
}

}  // namespace dynent

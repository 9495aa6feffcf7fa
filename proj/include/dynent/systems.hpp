#pragma once

#include <cmath>
#include <functional>

#include "dynent/control.hpp"
#include "dynent/manifold.hpp"

namespace dynent {

// Concrete anchored systems on the model manifolds. Generators evaluate on
// the wrapped chart representative where coefficients depend on position;
// trajectories themselves integrate unwrapped.

// Full-rank system: one generator per chart axis, so the anchor is the
// identity and the reachable set is the whole torus.
inline AnchoredSystem torus_full_rank_system(const TorusModel& torus,
                                             ControlNorm norm) {
  AnchoredSystem sys;
  sys.dim = torus.dim;
  sys.control_dim = torus.dim;
  sys.norm = std::move(norm);
  TorusModel model = torus;
  sys.generators = [dim = torus.dim](const double* /*x*/, Mat& b) {
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) b(i, j) = (i == j) ? 1.0 : 0.0;
  };
  sys.base_dist = [model](const double* a, const double* b) { return model.dist(a, b); };
  sys.displacement = [model](const double* a, const double* b, double* out) {
    model.displacement(a, b, out);
  };
  return sys;
}

inline AnchoredSystem torus_full_rank_system(const TorusModel& torus) {
  return torus_full_rank_system(torus, ControlNorm::euclidean(torus.dim));
}

// Two generators on a 3-torus chart whose bracket points along the third
// axis: columns (1,0,0) and (0,1,x). Bracket-generating, hence controllable.
inline AnchoredSystem heisenberg_system(const TorusModel& torus3) {
  AnchoredSystem sys;
  sys.dim = 3;
  sys.control_dim = 2;
  sys.norm = ControlNorm::euclidean(2);
  TorusModel model = torus3;
  sys.generators = [model](const double* x, Mat& b) {
    double rep = std::fmod(x[0], model.circumference);
    if (rep < 0.0) rep += model.circumference;
    b(0, 0) = 1.0;
    b(0, 1) = 0.0;
    b(1, 0) = 0.0;
    b(1, 1) = 1.0;
    b(2, 0) = 0.0;
    b(2, 1) = rep;
  };
  sys.base_dist = [model](const double* a, const double* b) { return model.dist(a, b); };
  sys.displacement = [model](const double* a, const double* b, double* out) {
    model.displacement(a, b, out);
  };
  return sys;
}

// Single constant generator along the line of slope alpha; integrable, its
// accessibility classes are the leaves of the linear foliation.
inline AnchoredSystem torus_line_system(const TorusModel& torus2, double alpha) {
  AnchoredSystem sys;
  sys.dim = 2;
  sys.control_dim = 1;
  sys.norm = ControlNorm::euclidean(1);
  TorusModel model = torus2;
  const double inv = 1.0 / std::sqrt(1.0 + alpha * alpha);
  sys.generators = [inv, alpha](const double* /*x*/, Mat& b) {
    b(0, 0) = inv;
    b(1, 0) = alpha * inv;
  };
  sys.base_dist = [model](const double* a, const double* b) { return model.dist(a, b); };
  sys.displacement = [model](const double* a, const double* b, double* out) {
    model.displacement(a, b, out);
  };
  return sys;
}

// Azimuthal rotation generator on the embedded 2-sphere: V(p) = z x p. It
// vanishes at both poles, so the accessibility classes are the latitude
// circles plus two point classes.
inline AnchoredSystem sphere_azimuthal_system(const SphereModel& sphere) {
  AnchoredSystem sys;
  sys.dim = 3;
  sys.control_dim = 1;
  sys.norm = ControlNorm::euclidean(1);
  SphereModel model = sphere;
  sys.generators = [](const double* x, Mat& b) {
    b(0, 0) = -x[1];
    b(1, 0) = x[0];
    b(2, 0) = 0.0;
  };
  sys.base_dist = [model](const double* a, const double* b) { return model.dist(a, b); };
  sys.chart_bound = 10.0 * sphere.radius + 10.0;
  return sys;
}

// One-dimensional anchored bundle over the circle: anchor u -> u * phi(x) Z
// with Z the unit rotation field and phi a profile that may vanish.
inline AnchoredSystem circle_profile_system(const TorusModel& circle,
                                            std::function<double(double)> profile) {
  AnchoredSystem sys;
  sys.dim = 1;
  sys.control_dim = 1;
  sys.norm = ControlNorm::euclidean(1);
  TorusModel model = circle;
  sys.generators = [model, profile](const double* x, Mat& b) {
    double rep = std::fmod(x[0], model.circumference);
    if (rep < 0.0) rep += model.circumference;
    b(0, 0) = profile(rep);
  };
  sys.base_dist = [model](const double* a, const double* b) { return model.dist(a, b); };
  sys.displacement = [model](const double* a, const double* b, double* out) {
    model.displacement(a, b, out);
  };
  return sys;
}

}  // namespace dynent

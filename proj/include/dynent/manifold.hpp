#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dynent/matrix.hpp"
#include "dynent/metric_space.hpp"

namespace dynent {

// Flat torus R^d / (c Z)^d with the quotient metric: coordinates live in
// [0, c), distances minimize over lattice shifts coordinate-wise.
struct TorusModel {
  std::size_t dim = 2;
  double circumference = 1.0;
  enum class Metric { euclidean, chebyshev } metric = Metric::euclidean;

  double axis_gap(double a, double b) const {
    double g = std::fabs(a - b);
    g = std::fmod(g, circumference);
    return std::min(g, circumference - g);
  }

  double dist(const double* a, const double* b) const {
    if (metric == Metric::chebyshev) {
      double m = 0.0;
      for (std::size_t c = 0; c < dim; ++c) m = std::max(m, axis_gap(a[c], b[c]));
      return m;
    }
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double g = axis_gap(a[c], b[c]);
      s += g * g;
    }
    return std::sqrt(s);
  }

  void wrap(double* x) const {
    for (std::size_t c = 0; c < dim; ++c) {
      x[c] = std::fmod(x[c], circumference);
      if (x[c] < 0.0) x[c] += circumference;
    }
  }

  // shortest displacement b - a on the quotient, coordinate-wise
  void displacement(const double* a, const double* b, double* out) const {
    for (std::size_t c = 0; c < dim; ++c) {
      double g = b[c] - a[c];
      g = std::fmod(g, circumference);
      if (g > circumference / 2.0) g -= circumference;
      if (g < -circumference / 2.0) g += circumference;
      out[c] = g;
    }
  }

  double diameter() const {
    const double h = circumference / 2.0;
    return metric == Metric::chebyshev ? h : h * std::sqrt(static_cast<double>(dim));
  }

  // uniform grid, per_axis points per axis, n = per_axis^dim
  Mat grid_sample(std::size_t per_axis) const {
    std::size_t n = 1;
    for (std::size_t c = 0; c < dim; ++c) n *= per_axis;
    Mat pts(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t rem = i;
      for (std::size_t c = dim; c-- > 0;) {
        pts(i, c) = circumference * static_cast<double>(rem % per_axis) /
                    static_cast<double>(per_axis);
        rem /= per_axis;
      }
    }
    return pts;
  }
};

// Round 2-sphere of given radius, points stored as 3D embedding coordinates.
// Great-circle distance computed through the chord, which keeps it exact on
// antipodal and coincident pairs.
struct SphereModel {
  double radius = 1.0;

  double dist(const double* a, const double* b) const {
    double chord2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double g = a[c] - b[c];
      chord2 += g * g;
    }
    const double half = std::min(1.0, std::sqrt(chord2) / (2.0 * radius));
    return 2.0 * radius * std::asin(half);
  }

  double diameter() const { return 3.14159265358979323846 * radius; }

  static Mat to_xyz(double radius, const std::vector<double>& polar,
                    const std::vector<double>& azimuth) {
    Mat pts(polar.size(), 3);
    for (std::size_t i = 0; i < polar.size(); ++i) {
      pts(i, 0) = radius * std::sin(polar[i]) * std::cos(azimuth[i]);
      pts(i, 1) = radius * std::sin(polar[i]) * std::sin(azimuth[i]);
      pts(i, 2) = radius * std::cos(polar[i]);
    }
    return pts;
  }

  // Golden-angle azimuths spread over shared latitude rings, plus both poles.
  // ring_label[i] identifies the latitude circle through point i; the poles
  // get their own labels. These labels are the analytic leaf labels for the
  // foliation of the sphere by latitude circles.
  struct RingSample {
    Mat points;                       // n x 3
    std::vector<int> ring_label;      // 0..n_rings+1
  };
  RingSample ring_sample(std::size_t n_rings, std::size_t per_ring) const {
    RingSample out;
    const double golden = 2.39996322972865332;  // 2*pi*(1 - 1/phi)
    std::vector<double> polar, azimuth;
    std::vector<int> label;
    polar.push_back(0.0);
    azimuth.push_back(0.0);
    label.push_back(0);  // north pole
    for (std::size_t r = 0; r < n_rings; ++r) {
      const double theta =
          3.14159265358979323846 * static_cast<double>(r + 1) / static_cast<double>(n_rings + 1);
      for (std::size_t j = 0; j < per_ring; ++j) {
        polar.push_back(theta);
        azimuth.push_back(std::fmod(golden * static_cast<double>(r * per_ring + j),
                                    2.0 * 3.14159265358979323846));
        label.push_back(static_cast<int>(r) + 1);
      }
    }
    polar.push_back(3.14159265358979323846);
    azimuth.push_back(0.0);
    label.push_back(static_cast<int>(n_rings) + 1);  // south pole
    out.points = to_xyz(radius, polar, azimuth);
    out.ring_label = std::move(label);
    return out;
  }

  // Fibonacci lattice; latitudes all distinct.
  Mat fibonacci_sample(std::size_t n) const {
    const double golden = 2.39996322972865332;
    std::vector<double> polar(n), azimuth(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      polar[i] = std::acos(z);
      azimuth[i] = std::fmod(golden * static_cast<double>(i), 2.0 * 3.14159265358979323846);
    }
    return to_xyz(radius, polar, azimuth);
  }
};

// Circle as the 1-torus; kept explicit because several scenarios live on it.
inline Mat circle_grid(std::size_t n, double circumference = 1.0) {
  Mat pts(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    pts(i, 0) = circumference * static_cast<double>(i) / static_cast<double>(n);
  return pts;
}

// Materializes a FiniteMetricSpace from sampled coordinates and a metric.
template <class MetricFn>
FiniteMetricSpace space_from_points(const Mat& coords, MetricFn&& metric,
                                    const std::vector<std::string>& labels = {}) {
  FiniteMetricSpace s;
  const std::size_t n = coords.rows();
  s.coords = coords;
  s.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    s.labels.push_back(i < labels.size() ? labels[i] : std::to_string(i));
  s.dist = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s.dist(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = metric(coords.row(i), coords.row(j));
      s.dist(i, j) = d;
      s.dist(j, i) = d;
    }
  }
  return s;
}

}  // namespace dynent

#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dynent/errors.hpp"
#include "dynent/matrix.hpp"
#include "dynent/rng.hpp"

namespace dynent {

inline constexpr double kDefaultMetricTol = 1e-9;

// A sampled compact metric space: point labels, optional chart/embedding
// coordinates, and the full pairwise distance matrix.
struct FiniteMetricSpace {
  std::vector<std::string> labels;
  Mat coords;  // n x d, empty when points carry no coordinates
  Mat dist;    // n x n

  std::size_t size() const { return dist.rows(); }
  bool has_coords() const { return !coords.empty(); }

  double diameter() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) m = std::max(m, dist(i, j));
    return m;
  }
};

struct MetricViolation {
  enum class Kind { diagonal, asymmetry, triangle } kind;
  std::size_t i = 0, j = 0, k = 0;
  double amount = 0.0;

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::diagonal:
        os << "nonzero diagonal at " << i << " (" << amount << ")";
        break;
      case Kind::asymmetry:
        os << "asymmetry at (" << i << "," << j << ") by " << amount;
        break;
      case Kind::triangle:
        os << "triangle violation " << i << "->" << k << " via " << j << " by " << amount;
        break;
    }
    return os.str();
  }
};

// Checks the three metric axioms at tolerance tol. Returns the list of
// violations; empty means the matrix is a valid metric at that tolerance.
inline std::vector<MetricViolation> validate_metric(const Mat& d, double tol = kDefaultMetricTol) {
  const std::size_t n = d.rows();
  if (n != d.cols()) throw Error(Errc::non_square, "distance matrix must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(d(i, j)))
        throw Error(Errc::negative_entry, "non-finite distance entry");
      if (d(i, j) < 0.0) throw Error(Errc::negative_entry, "negative distance entry");
    }

  std::vector<MetricViolation> out;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(d(i, i)) > tol)
      out.push_back({MetricViolation::Kind::diagonal, i, i, i, d(i, i)});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = std::abs(d(i, j) - d(j, i));
      if (gap > tol) out.push_back({MetricViolation::Kind::asymmetry, i, j, j, gap});
    }
  for (std::size_t j = 0; j < n; ++j) {
    const double* dj = d.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double dij = d(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        const double slack = d(i, k) - dij - dj[k];
        if (slack > tol)
          out.push_back({MetricViolation::Kind::triangle, i, j, k, slack});
      }
    }
  }
  return out;
}

// Triangle check on a random subsample of triples; for spaces too large for
// the cubic full check. Deterministic in the seed.
inline std::vector<MetricViolation> validate_metric_sampled(const Mat& d, double tol,
                                                            std::size_t n_triples,
                                                            std::uint64_t seed) {
  const std::size_t n = d.rows();
  if (n != d.cols()) throw Error(Errc::non_square, "distance matrix must be square");
  std::vector<MetricViolation> out;
  Rng rng(seed);
  for (std::size_t t = 0; t < n_triples; ++t) {
    const std::size_t i = rng.below(n), j = rng.below(n), k = rng.below(n);
    const double slack = d(i, k) - d(i, j) - d(j, k);
    if (slack > tol) out.push_back({MetricViolation::Kind::triangle, i, j, k, slack});
    const double gap = std::abs(d(i, j) - d(j, i));
    if (gap > tol) out.push_back({MetricViolation::Kind::asymmetry, i, j, j, gap});
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(d(i, i)) > tol)
      out.push_back({MetricViolation::Kind::diagonal, i, i, i, d(i, i)});
  return out;
}

inline FiniteMetricSpace restrict_space(const FiniteMetricSpace& s,
                                        const std::vector<std::size_t>& subset) {
  if (subset.empty()) throw Error(Errc::empty_subset, "restrict needs a nonempty subset");
  const std::size_t m = subset.size();
  FiniteMetricSpace out;
  out.labels.reserve(m);
  for (std::size_t i : subset) {
    if (i >= s.size()) throw Error(Errc::index_out_of_range, "restrict index out of range");
    out.labels.push_back(i < s.labels.size() ? s.labels[i] : std::to_string(i));
  }
  out.dist = Mat(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) out.dist(a, b) = s.dist(subset[a], subset[b]);
  if (s.has_coords()) {
    out.coords = Mat(m, s.coords.cols());
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t c = 0; c < s.coords.cols(); ++c) out.coords(a, c) = s.coords(subset[a], c);
  }
  return out;
}

// Product space with the max metric d((x',x''),(y',y'')) = max(d'(x',y'), d''(x'',y'')).
// Point (ia, ib) gets flat index ia * b.size() + ib.
inline FiniteMetricSpace max_combine(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
  const std::size_t na = a.size(), nb = b.size();
  if (na == 0 || nb == 0) throw Error(Errc::empty_space, "max_combine needs nonempty factors");
  FiniteMetricSpace out;
  out.labels.reserve(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const std::string la = i < a.labels.size() ? a.labels[i] : std::to_string(i);
      const std::string lb = j < b.labels.size() ? b.labels[j] : std::to_string(j);
      out.labels.push_back(la + "|" + lb);
    }
  out.dist = Mat(na * nb, na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const std::size_t p = i * nb + j;
      for (std::size_t k = 0; k < na; ++k)
        for (std::size_t l = 0; l < nb; ++l)
          out.dist(p, k * nb + l) = std::max(a.dist(i, k), b.dist(j, l));
    }
  if (a.has_coords() && b.has_coords()) {
    const std::size_t da = a.coords.cols(), db = b.coords.cols();
    out.coords = Mat(na * nb, da + db);
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t p = i * nb + j;
        for (std::size_t c = 0; c < da; ++c) out.coords(p, c) = a.coords(i, c);
        for (std::size_t c = 0; c < db; ++c) out.coords(p, da + c) = b.coords(j, c);
      }
  }
  return out;
}

// ---- CSV fixtures: header row of labels, then row-major distances ----

inline void dump_metric_csv(const FiniteMetricSpace& s, std::ostream& os) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    os << (i < s.labels.size() ? s.labels[i] : std::to_string(i));
    os << (i + 1 < n ? ',' : '\n');
  }
  os.precision(17);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) os << s.dist(i, j) << (j + 1 < n ? ',' : '\n');
}

inline void dump_metric_csv(const FiniteMetricSpace& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  dump_metric_csv(s, f);
}

inline FiniteMetricSpace load_metric_csv(std::istream& is) {
  FiniteMetricSpace s;
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::io_error, "empty metric CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) s.labels.push_back(cell);
  }
  const std::size_t n = s.labels.size();
  s.dist = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line))
      throw Error(Errc::io_error, "metric CSV truncated at row " + std::to_string(i));
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::getline(ss, cell, ','))
        throw Error(Errc::io_error, "metric CSV row too short");
      s.dist(i, j) = std::stod(cell);
    }
  }
  return s;
}

inline FiniteMetricSpace load_metric_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open " + path);
  return load_metric_csv(f);
}

}  // namespace dynent

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <vector>

#include "dynent/control.hpp"
#include "dynent/curve.hpp"
#include "dynent/errors.hpp"
#include "dynent/matrix.hpp"
#include "dynent/parallel.hpp"

namespace dynent {

struct ProbeOptions {
  double r_probe = 1.0;
  std::size_t n_probe = 32;
  std::size_t n_segments = 8;
  double eps_link = 0.05;
  SampleOptions sample;
  unsigned workers = 1;
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

// Probe bundles, one per sample point. The per-point stream hashes the
// point's coordinates rather than its index, so the resulting partition is
// invariant under relabeling of the sample.
inline std::uint64_t point_stream_key(const double* x, std::size_t dim) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t c = 0; c < dim; ++c) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof(double));
    std::memcpy(&bits, &x[c], sizeof bits);
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    (void)splitmix64(h);
  }
  return h;
}

inline std::vector<CurveBundle> probe_bundles(const AnchoredSystem& sys, const Mat& coords,
                                              std::uint64_t seed, const ProbeOptions& opt) {
  const std::size_t n = coords.rows();
  std::vector<CurveBundle> out(n);
  parallel_for(n, opt.workers, [&](std::size_t p) {
    const std::uint64_t key = point_stream_key(coords.row(p), coords.cols());
    out[p] = sample_bounded_curves(sys, coords.row(p), p, opt.r_probe, opt.n_probe,
                                   opt.n_segments, derive_seed(seed, {key}), opt.sample);
  });
  return out;
}

// Approximate accessibility classes: p and q land in one class when a sampled
// trajectory from either passes within eps_link of the other. Requires a
// symmetric control ball so sampled reachability is symmetric.
inline std::vector<int> accessibility_partition(const AnchoredSystem& sys, const Mat& coords,
                                                const std::vector<CurveBundle>& bundles,
                                                const ProbeOptions& opt) {
  if (!sys.symmetric_controls)
    throw Error(Errc::asymmetric_controls,
                "partition probing requires a symmetric control ball");
  const std::size_t n = coords.rows();
  detail::UnionFind uf(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (const Curve& c : bundles[p].curves) {
      for (std::size_t t = 0; t < c.samples(); ++t) {
        const double* pt = c.points.row(t);
        for (std::size_t q = 0; q < n; ++q) {
          if (uf.find(q) == uf.find(p)) continue;
          if (sys.base_dist(pt, coords.row(q)) <= opt.eps_link) uf.unite(p, q);
        }
      }
    }
  }
  // canonical labels: classes numbered by first occurrence
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = uf.find(i);
    if (label[root] < 0) label[root] = next++;
    label[i] = label[root];
  }
  return label;
}

inline std::vector<int> accessibility_partition(const AnchoredSystem& sys, const Mat& coords,
                                                std::uint64_t seed, const ProbeOptions& opt) {
  return accessibility_partition(sys, coords, probe_bundles(sys, coords, seed, opt), opt);
}

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Weighted reachability graph: edge (p, q) carries the shortest sampled curve
// length from p up to its first pass within eps_link of q, plus eps_link as
// the gap-closing penalty. Edge weights therefore never undercut the true
// admissible distance, and shortest paths stay upper-biased.
inline Mat admissible_graph(const AnchoredSystem& sys, const Mat& coords,
                            const std::vector<CurveBundle>& bundles, const ProbeOptions& opt) {
  const std::size_t n = coords.rows();
  Mat w(n, n, kUnreachable);
  for (std::size_t p = 0; p < n; ++p) w(p, p) = 0.0;
  Vec u;
  for (std::size_t p = 0; p < n; ++p) {
    for (const Curve& c : bundles[p].curves) {
      if (!c.has_controls()) continue;
      double len = 0.0;
      u.assign(c.controls.cols(), 0.0);
      for (std::size_t t = 0; t < c.samples(); ++t) {
        if (t > 0) {
          for (std::size_t j = 0; j < u.size(); ++j) u[j] = c.controls(t - 1, j);
          len += sys.norm(u) * (c.times[t] - c.times[t - 1]);
        }
        const double* pt = c.points.row(t);
        for (std::size_t q = 0; q < n; ++q) {
          if (q == p) continue;
          if (sys.base_dist(pt, coords.row(q)) <= opt.eps_link) {
            const double cand = len + opt.eps_link;
            if (cand < w(p, q)) w(p, q) = cand;
          }
        }
      }
    }
  }
  // symmetric control balls make reachability symmetric; keep the cheaper side
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      const double m = std::min(w(p, q), w(q, p));
      w(p, q) = m;
      w(q, p) = m;
    }
  return w;
}

// All-pairs shortest paths over the admissible graph; entries stay infinite
// across distinct accessibility components.
inline Mat admissible_graph_distances(Mat w) {
  const std::size_t n = w.rows();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (w(i, k) == kUnreachable) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (w(k, j) == kUnreachable) continue;
        const double cand = w(i, k) + w(k, j);
        if (cand < w(i, j)) w(i, j) = cand;
      }
    }
  return w;
}

// Upper-biased estimate of the admissible distance between two sample points;
// +infinity when they sit in different accessibility components.
inline double admissible_graph_distance(const AnchoredSystem& sys, const Mat& coords,
                                        const std::vector<CurveBundle>& bundles,
                                        std::size_t x, std::size_t y, const ProbeOptions& opt) {
  const Mat d = admissible_graph_distances(admissible_graph(sys, coords, bundles, opt));
  return d(x, y);
}

}  // namespace dynent

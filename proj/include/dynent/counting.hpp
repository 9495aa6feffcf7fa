#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dynent/errors.hpp"
#include "dynent/metric_space.hpp"

namespace dynent {

inline constexpr std::size_t kNoCap = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kExactSizeLimitDefault = 12;

// Greedy ball cover: sweep points in index order, each uncovered point becomes
// a center and covers everything within <= eps. Upper bound on the minimum
// cover number M(d, eps).
template <class DistFn>
std::size_t greedy_cover_count(std::size_t n, DistFn&& dist, double eps) {
  if (n == 0) throw Error(Errc::empty_space, "cover of empty space");
  std::vector<char> covered(n, 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (covered[i]) continue;
    ++count;
    covered[i] = 1;
    for (std::size_t j = i + 1; j < n; ++j)
      if (!covered[j] && dist(i, j) <= eps) covered[j] = 1;
  }
  return count;
}

// Farthest-point greedy packing: start at index 0, repeatedly add the point
// with the largest distance to the chosen set while that distance is strictly
// greater than eps. Produces a maximal eps-separated set, so the result lies
// between the exact cover and the exact packing number.
//
// cap stops the construction early once cap points are found; callers use it
// to detect saturation without paying for the full maximal set.
template <class DistFn>
std::size_t greedy_packing_count(std::size_t n, DistFn&& dist, double eps,
                                 std::size_t cap = kNoCap) {
  if (n == 0) throw Error(Errc::empty_space, "packing of empty space");
  std::vector<double> min_dist(n);
  for (std::size_t j = 0; j < n; ++j) min_dist[j] = dist(0, j);
  std::size_t count = 1;
  while (count < cap) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (min_dist[j] > best_d) {
        best_d = min_dist[j];
        best = j;
      }
    if (!(best_d > eps)) break;  // separation is strict
    ++count;
    for (std::size_t j = 0; j < n; ++j) {
      const double dj = dist(best, j);
      if (dj < min_dist[j]) min_dist[j] = dj;
    }
  }
  return count;
}

// Exhaustive minimum cover and maximum packing by subset enumeration.
// Feasible only for small n; this is the test oracle behind the greedy
// production path.
template <class DistFn>
std::pair<std::size_t, std::size_t> exact_counts(std::size_t n, DistFn&& dist, double eps,
                                                 std::size_t size_limit = kExactSizeLimitDefault) {
  if (n == 0) throw Error(Errc::empty_space, "counts of empty space");
  if (n > size_limit || n > 20)
    throw Error(Errc::too_large, "exact_counts limited to n <= " + std::to_string(size_limit));

  // cover_mask[i] = bitmask of points within <= eps of center i
  std::vector<std::uint32_t> cover_mask(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dist(i, j) <= eps) cover_mask[i] |= (1u << j);
  // sep_mask[i] = bitmask of points strictly further than eps from i
  std::vector<std::uint32_t> sep_mask(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && dist(i, j) > eps) sep_mask[i] |= (1u << j);

  const std::uint32_t full = (n == 32) ? 0xffffffffu : ((1u << n) - 1u);
  std::size_t best_cover = n, best_packing = 1;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const std::size_t k = static_cast<std::size_t>(__builtin_popcount(mask));
    if (k < best_cover) {
      std::uint32_t covered = 0;
      for (std::uint32_t m = mask; m; m &= m - 1)
        covered |= cover_mask[static_cast<std::size_t>(__builtin_ctz(m))];
      if (covered == full) best_cover = k;
    }
    if (k > best_packing) {
      bool separated = true;
      for (std::uint32_t m = mask; separated && m; m &= m - 1) {
        const std::size_t i = static_cast<std::size_t>(__builtin_ctz(m));
        if ((mask & ~(1u << i)) & ~sep_mask[i]) separated = false;
      }
      if (separated) best_packing = k;
    }
  }
  return {best_cover, best_packing};
}

struct CountResult {
  double epsilon = 0.0;
  std::size_t greedy_cover = 0;
  std::size_t greedy_packing = 0;
  std::optional<std::size_t> exact_cover;
  std::optional<std::size_t> exact_packing;
};

// ---- wrappers over FiniteMetricSpace and raw matrices ----

inline auto matrix_dist(const Mat& d) {
  return [&d](std::size_t i, std::size_t j) { return d(i, j); };
}

inline std::size_t greedy_cover_count(const FiniteMetricSpace& s, double eps) {
  return greedy_cover_count(s.size(), matrix_dist(s.dist), eps);
}

inline std::size_t greedy_packing_count(const FiniteMetricSpace& s, double eps,
                                        std::size_t cap = kNoCap) {
  return greedy_packing_count(s.size(), matrix_dist(s.dist), eps, cap);
}

inline std::pair<std::size_t, std::size_t> exact_counts(
    const FiniteMetricSpace& s, double eps, std::size_t size_limit = kExactSizeLimitDefault) {
  return exact_counts(s.size(), matrix_dist(s.dist), eps, size_limit);
}

inline CountResult count_at(const FiniteMetricSpace& s, double eps,
                            std::size_t exact_limit = kExactSizeLimitDefault) {
  CountResult r;
  r.epsilon = eps;
  r.greedy_cover = greedy_cover_count(s, eps);
  r.greedy_packing = greedy_packing_count(s, eps);
  if (s.size() <= exact_limit) {
    auto [c, p] = exact_counts(s, eps, exact_limit);
    r.exact_cover = c;
    r.exact_packing = p;
  }
  return r;
}

}  // namespace dynent

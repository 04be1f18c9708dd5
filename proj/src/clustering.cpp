#include "och/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "och/errors.hpp"
#include "och/rng.hpp"

namespace och {

namespace {

double dist_sq(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// k-means++: first center uniform, then points weighted by their squared
// distance to the nearest chosen center.
std::vector<double> seed_centers(const DataMatrix& data, std::size_t L,
                                 Rng& rng) {
  const std::size_t n = data.n;
  const std::size_t d = data.d;
  std::vector<double> centers(L * d);
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());

  std::size_t first = static_cast<std::size_t>(rng.next_index(n));
  std::copy_n(data.row(first), d, centers.begin());

  for (std::size_t c = 1; c < L; ++c) {
    const double* last = centers.data() + (c - 1) * d;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], dist_sq(data.row(i), last, d));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += closest[i];

    std::size_t pick;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += closest[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      // All remaining points coincide with chosen centers.
      pick = static_cast<std::size_t>(rng.next_index(n));
    }
    std::copy_n(data.row(pick), d, centers.begin() + c * d);
  }
  return centers;
}

}  // namespace

CenterSet kmeans(const DataMatrix& data, std::size_t L, std::size_t max_iters,
                 std::uint64_t seed) {
  if (L == 0) throw ArgumentError("kmeans: L must be positive");
  if (L > data.n) throw ArgumentError("kmeans: L exceeds point count");
  if (max_iters < 1) throw ArgumentError("kmeans: max_iters must be >= 1");

  const std::size_t n = data.n;
  const std::size_t d = data.d;

  Rng rng(seed);
  CenterSet out;
  out.L = L;
  out.d = d;
  out.centers = seed_centers(data, L, rng);
  out.assignments.assign(n, 0u);

  std::vector<std::uint32_t> prev(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> point_dist(n, 0.0);
  std::vector<double> sums(L * d);
  std::vector<std::size_t> counts(L);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // Assignment: nearest center, ties to the lowest index.
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = data.row(i);
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t best_c = 0;
      for (std::size_t c = 0; c < L; ++c) {
        double ds = dist_sq(p, out.center(c), d);
        if (ds < best) {
          best = ds;
          best_c = static_cast<std::uint32_t>(c);
        }
      }
      out.assignments[i] = best_c;
      point_dist[i] = best;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += point_dist[i];
    out.inertia = inertia;
    out.inertia_history.push_back(inertia);

    if (out.assignments == prev) break;
    prev = out.assignments;

    // Update: serial accumulation in index order keeps the result
    // independent of the number of threads used above.
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t c = out.assignments[i];
      const double* p = data.row(i);
      double* s = sums.data() + c * d;
      for (std::size_t k = 0; k < d; ++k) s[k] += p[k];
      ++counts[c];
    }
    for (std::size_t c = 0; c < L; ++c) {
      if (counts[c] == 0) continue;
      double inv = 1.0 / static_cast<double>(counts[c]);
      double* dst = out.center(c);
      const double* s = sums.data() + c * d;
      for (std::size_t k = 0; k < d; ++k) dst[k] = s[k] * inv;
    }

    // Empty-cluster repair: promote the point farthest from its center.
    for (std::size_t c = 0; c < L; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (point_dist[i] > far_d) {
          far_d = point_dist[i];
          far = i;
        }
      }
      std::copy_n(data.row(far), d, out.center(c));
      point_dist[far] = 0.0;  // next empty cluster takes the next-farthest
      counts[c] = 1;
    }
  }
  return out;
}

}  // namespace och

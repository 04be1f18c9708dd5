#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "och/dataset.hpp"

namespace och {

/// L k-means centers plus per-point assignments over the training data.
struct CenterSet {
  std::vector<double> centers;  // row-major, L * d
  std::size_t L = 0;
  std::size_t d = 0;
  std::vector<std::uint32_t> assignments;  // size n, values < L
  double inertia = 0.0;  // sum of squared distances to assigned centers
  std::vector<double> inertia_history;  // one entry per Lloyd iteration

  const double* center(std::size_t c) const { return centers.data() + c * d; }
  double* center(std::size_t c) { return centers.data() + c * d; }
};

/// Lloyd's algorithm from k-means++ seeding. Stops when assignments are
/// stable or after max_iters. Empty clusters are repaired by promoting the
/// point currently farthest from its center, so exactly L centers survive.
/// Deterministic per seed, independent of thread count: the assignment step
/// is per-point exact, the accumulation runs in fixed index order.
CenterSet kmeans(const DataMatrix& data, std::size_t L, std::size_t max_iters,
                 std::uint64_t seed);

}  // namespace och

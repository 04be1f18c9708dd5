#include "och/ordinal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "och/errors.hpp"

namespace och {

namespace {

double dist_sq(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t t = 0; t < dim; ++t) {
    const double diff = a[t] - b[t];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

double select_sigma(const double* points, std::size_t count, std::size_t dim) {
  if (count < 2) throw ArgumentError("select_sigma: need at least 2 points");
  std::vector<double> dists;
  dists.reserve(count * (count - 1) / 2);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j)
      dists.push_back(std::sqrt(dist_sq(points + i * dim, points + j * dim, dim)));
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  double median;
  if (m % 2 == 1) {
    median = dists[m / 2];
  } else {
    median = 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  }
  if (!(median > 0.0))
    throw NumericError("select_sigma: median pairwise distance is zero");
  return median;
}

double select_sigma(const CenterSet& centers) {
  return select_sigma(centers.centers.data(), centers.L, centers.d);
}

AffinityGraph build_affinity(const double* points, std::size_t count,
                             std::size_t dim, double sigma) {
  if (count < 2) throw ArgumentError("build_affinity: need at least 2 points");
  if (!(sigma > 0.0)) throw ArgumentError("build_affinity: sigma must be positive");
  const auto n = static_cast<Eigen::Index>(count);
  AffinityGraph graph;
  graph.sigma = sigma;
  graph.S.setZero(n, n);
  const double inv = 1.0 / (2.0 * sigma * sigma);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* pi = points + static_cast<std::size_t>(i) * dim;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* pj = points + static_cast<std::size_t>(j) * dim;
      graph.S(i, j) = std::exp(-dist_sq(pi, pj, dim) * inv);
    }
  }
  return graph;
}

AffinityGraph build_affinity(const CenterSet& centers, double sigma) {
  return build_affinity(centers.centers.data(), centers.L, centers.d, sigma);
}

DissimilarityGraph build_dissimilarity(const AffinityGraph& affinity) {
  const Eigen::Index n = affinity.S.rows();
  DissimilarityGraph graph;
  graph.DS.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double s = affinity.S(i, j);
      if (s <= 0.0)
        throw NumericError("build_dissimilarity: affinity underflowed to zero at (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
      graph.DS(i, j) = 1.0 / s;
    }
  }
  return graph;
}

Ordering ordinal_compare(const AffinityGraph& affinity,
                         const DissimilarityGraph& dissimilarity,
                         std::size_t i, std::size_t j, std::size_t k,
                         std::size_t l) {
  if (i == j || k == l)
    throw ArgumentError("ordinal_compare: self-pairs have no defined distance rank");
  return tog_entry(affinity, dissimilarity, i, j, k, l) > 1.0 ? Ordering::Less
                                                              : Ordering::Geq;
}

TripletSet extract_triplets(const AffinityGraph& affinity,
                            const DissimilarityGraph& dissimilarity) {
  const std::size_t n = affinity.size();
  if (dissimilarity.size() != n)
    throw ArgumentError("extract_triplets: graph sizes disagree");
  TripletSet out;
  out.num_centers = n;
  if (n < 3) return out;

  std::vector<std::vector<Triplet>> per_anchor(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    auto& bucket = per_anchor[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (ordinal_compare(affinity, dissimilarity, i, j, i, k) == Ordering::Less)
          bucket.push_back({static_cast<std::uint32_t>(i),
                            static_cast<std::uint32_t>(j),
                            static_cast<std::uint32_t>(k)});
      }
    }
  }

  std::size_t total = 0;
  for (const auto& bucket : per_anchor) total += bucket.size();
  out.triplets.reserve(total);
  for (const auto& bucket : per_anchor)
    out.triplets.insert(out.triplets.end(), bucket.begin(), bucket.end());
  return out;
}

void write_triplets(const std::string& path, const TripletSet& triplets) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw FormatError("write_triplets: cannot open " + path);
  for (const auto& t : triplets.triplets) {
    std::uint32_t rec[3] = {t.anchor, t.closer, t.farther};
    file.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  if (!file) throw FormatError("write_triplets: write failed for " + path);
}

}  // namespace och

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "och/clustering.hpp"

namespace och {

/// Gaussian-kernel affinity over a point set: S(i,j) = exp(-||xi-xj||^2 /
/// (2 sigma^2)) off the diagonal, S(i,i) = 0. Symmetric.
struct AffinityGraph {
  Eigen::MatrixXd S;
  double sigma = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(S.rows()); }
};

/// Entrywise reciprocal of the affinity off the diagonal, zero diagonal.
/// DS(i,j) >= 1 plays the role of the pairwise dissimilarity.
struct DissimilarityGraph {
  Eigen::MatrixXd DS;

  std::size_t size() const { return static_cast<std::size_t>(DS.rows()); }
};

/// One ordinal constraint over centers: `closer` ranks nearer to `anchor`
/// than `farther` does.
struct Triplet {
  std::uint32_t anchor;
  std::uint32_t closer;
  std::uint32_t farther;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletSet {
  std::vector<Triplet> triplets;
  std::size_t num_centers = 0;
};

enum class Ordering { Less, Geq };

/// Median of all pairwise Euclidean distances; the default kernel bandwidth.
/// Throws NumericError when the median is not strictly positive.
double select_sigma(const double* points, std::size_t count, std::size_t dim);
double select_sigma(const CenterSet& centers);

AffinityGraph build_affinity(const double* points, std::size_t count,
                             std::size_t dim, double sigma);
AffinityGraph build_affinity(const CenterSet& centers, double sigma);

/// Throws NumericError naming (i,j) if any off-diagonal affinity underflowed
/// to zero (its reciprocal would overflow).
DissimilarityGraph build_dissimilarity(const AffinityGraph& affinity);

/// Entry (ij,kl) of the tensor ordinal graph G = S (x) DS. G is never
/// materialized (it has size^2 x size^2 entries); this accessor is the graph.
inline double tog_entry(const AffinityGraph& affinity,
                        const DissimilarityGraph& dissimilarity,
                        std::size_t i, std::size_t j, std::size_t k,
                        std::size_t l) {
  return affinity.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
         dissimilarity.DS(static_cast<Eigen::Index>(k),
                          static_cast<Eigen::Index>(l));
}

/// Less iff the pair (i,j) is strictly closer than (k,l), decided by
/// tog_entry > 1; the boundary (equal distances, entry exactly 1) is Geq.
/// Self-pairs (i == j or k == l) are rejected.
Ordering ordinal_compare(const AffinityGraph& affinity,
                         const DissimilarityGraph& dissimilarity,
                         std::size_t i, std::size_t j, std::size_t k,
                         std::size_t l);

/// All ordered triples (anchor; closer, farther) of pairwise-distinct center
/// indices whose ordinal_compare is Less. Output sorted by (anchor, closer,
/// farther); extraction parallelizes over anchors.
TripletSet extract_triplets(const AffinityGraph& affinity,
                            const DissimilarityGraph& dissimilarity);

/// Debug dump: little-endian u32 triples (anchor, closer, farther).
void write_triplets(const std::string& path, const TripletSet& triplets);

}  // namespace och

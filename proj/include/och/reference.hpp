#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "och/dataset.hpp"
#include "och/encoder.hpp"
#include "och/evaluation.hpp"
#include "och/optimizer.hpp"
#include "och/ordinal_graph.hpp"

/// Plain serial counterparts of the parallel kernels, written as one-pass
/// scalar loops. They are the oracles the tests compare against, and the
/// baselines bench_kernels times the parallel versions against. Nothing here
/// shares accumulation code with the library implementations.
namespace och::reference {

Eigen::MatrixXd gram(const DataMatrix& data);

AffinityGraph affinity(const double* points, std::size_t count, std::size_t dim,
                       double sigma);

/// Triplets decided by direct squared-distance comparison (no kernel, no
/// reciprocal): (i; j, k) kept iff dist(i,j) < dist(i,k) strictly.
TripletSet triplets_by_distance(const double* points, std::size_t count,
                                std::size_t dim);

double objective(const StiefelPoint& V, std::span<const Triplet> batch,
                 const EmbeddedPoints& centers);

Eigen::MatrixXd grad_objective(const StiefelPoint& V,
                               std::span<const Triplet> batch,
                               const EmbeddedPoints& centers);

BinaryCodes encode(const HashModel& model, const DataMatrix& points);

/// Bit-by-bit comparison, no word packing tricks.
std::uint32_t hamming(const BinaryCodes& codes, std::size_t i, std::size_t j);

GroundTruth groundtruth(const DataMatrix& queries, const DataMatrix& base,
                        double fraction);

std::vector<std::uint32_t> hamming_rank(const BinaryCodes& query_codes,
                                        std::size_t query_index,
                                        const BinaryCodes& base_codes);

}  // namespace och::reference

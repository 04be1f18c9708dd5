#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace och {

/// n feature vectors of dimension d, stored row-major.
/// Once `preprocessed` is set, every per-dimension mean is ~0 and every row
/// has unit L2 norm (see preprocess()).
struct DataMatrix {
  std::vector<double> values;  // row-major, n * d
  std::size_t n = 0;
  std::size_t d = 0;
  bool preprocessed = false;

  double* row(std::size_t i) { return values.data() + i * d; }
  const double* row(std::size_t i) const { return values.data() + i * d; }
};

/// Query/base/train partition of a dataset. queries and base are disjoint by
/// source index; train is a subset of base. Index vectors refer to rows of
/// the source matrix and are sorted ascending.
struct DataSplit {
  DataMatrix queries;
  DataMatrix base;
  DataMatrix train;
  std::vector<std::uint32_t> query_indices;
  std::vector<std::uint32_t> base_indices;
  std::vector<std::uint32_t> train_indices;  // into the source, not into base
  std::uint64_t seed = 0;
};

/// Reads an fvecs file: repeated records of [int32 LE dim][dim x float32 LE].
/// Throws FormatError on truncated records, inconsistent or non-positive
/// dimensions. An empty file yields an empty (n = 0) matrix.
DataMatrix load_fvecs(const std::string& path);

/// Writes fvecs (values rounded to float32).
void write_fvecs(const std::string& path, const DataMatrix& data);

/// Reads a CSV file: one vector per line, comma-separated decimal floats,
/// no header. Strict parsing; any malformed field is a FormatError.
DataMatrix load_csv(const std::string& path);

/// Mean-centers per dimension, then L2-normalizes each vector, sweeping until
/// both hold simultaneously (the normalization step perturbs the mean, so a
/// single pass does not reach the fixed point). Throws NumericError if any
/// vector becomes zero after centering.
[[nodiscard]] DataMatrix preprocess(const DataMatrix& data);

/// Mixture of num_clusters isotropic Gaussians with means drawn uniformly in
/// [-1,1]^d and standard deviation `spread`. Deterministic per seed. Points
/// are distributed evenly over clusters. If cluster_means is non-null it
/// receives the num_clusters x d means (row-major).
DataMatrix gen_synthetic(std::size_t num_clusters, std::size_t n,
                         std::size_t d, double spread, std::uint64_t seed,
                         std::vector<double>* cluster_means = nullptr);

/// Samples n_query query points without replacement; the rest form the base;
/// n_train points are then sampled from the base. Deterministic per seed.
DataSplit split(const DataMatrix& data, std::size_t n_query,
                std::size_t n_train, std::uint64_t seed);

}  // namespace och

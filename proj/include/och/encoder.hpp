#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "och/dataset.hpp"
#include "och/ocp.hpp"
#include "och/optimizer.hpp"

namespace och {

enum class ModelKind : std::uint32_t { Och = 0, Lsh = 1 };

/// A trained hash function x -> sgn(W^T x) with W = Z^T V cached. For the
/// random-projection baseline Z is the identity and V holds the Gaussian W.
struct HashModel {
  ModelKind kind = ModelKind::Och;
  Eigen::MatrixXd Z;            // d_svd x d, orthonormal rows
  Eigen::VectorXd eigenvalues;  // spectrum behind Z (zeros for the baseline)
  Eigen::MatrixXd V;            // d_svd x r
  Eigen::MatrixXd W;            // d x r composite
  std::size_t d = 0;
  std::size_t d_svd = 0;
  std::size_t r = 0;
};

/// Bit-packed codes, one row per point: code bit k lives in word k/64 at bit
/// k%64; tail bits past r are zero in every row.
struct BinaryCodes {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t words_per_code = 0;
  std::vector<std::uint64_t> words;

  const std::uint64_t* row(std::size_t i) const {
    return words.data() + i * words_per_code;
  }
  bool bit(std::size_t i, std::size_t k) const {
    return (row(i)[k / 64] >> (k % 64)) & 1u;
  }
};

/// Composes the learned pieces into a model, gating on their invariants:
/// V must have orthonormal rows and Z orthonormal rows, both within 1e-6.
HashModel build_och_model(const OrdinalProjection& projection,
                          const StiefelPoint& V, std::size_t r);

/// Random-projection baseline: W is d x r with unit Gaussian entries.
HashModel build_lsh_model(std::size_t d, std::size_t r, std::uint64_t seed);

/// sgn(W^T x) per point, packed. Zero projects to bit 0 (sign convention:
/// positive -> 1, otherwise 0). Parallel over points.
BinaryCodes encode(const HashModel& model, const DataMatrix& points);

/// Popcount-of-XOR distance between rows i and j.
std::uint32_t hamming(const BinaryCodes& codes, std::size_t i, std::size_t j);
std::uint32_t hamming_rows(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t words);

/// Binary container: magic "OCH1", u32 kind/d/d_svd/r, then row-major f64
/// Z, V, eigenvalues. Exact float round-trip.
void save_model(const std::string& path, const HashModel& model);
HashModel load_model(const std::string& path);

/// Raw packed rows prefixed by (n: u32, r: u32).
void write_codes(const std::string& path, const BinaryCodes& codes);
BinaryCodes load_codes(const std::string& path);

}  // namespace och

#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "och/clustering.hpp"
#include "och/dataset.hpp"

namespace och {

/// Sum of outer products M = sum_i x_i x_i^T over the training points
/// (d x d, symmetric positive semidefinite).
struct GramMatrix {
  Eigen::MatrixXd M;
};

/// Top eigenvectors of the Gram matrix. Z is d_svd x d with rows equal to
/// unit eigenvectors ordered by descending eigenvalue; each row's sign is
/// fixed so its largest-magnitude component is non-negative.
struct OrdinalProjection {
  Eigen::MatrixXd Z;
  Eigen::VectorXd eigenvalues;

  std::size_t d_svd() const { return static_cast<std::size_t>(Z.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(Z.cols()); }
};

/// Points mapped through Z, stored one per column (d_svd x m).
struct EmbeddedPoints {
  Eigen::MatrixXd U;

  std::size_t dim() const { return static_cast<std::size_t>(U.rows()); }
  std::size_t count() const { return static_cast<std::size_t>(U.cols()); }
};

GramMatrix compute_gram(const DataMatrix& data);

/// Eigendecomposition of the Gram matrix keeping the d_svd leading
/// eigenvectors. Throws ArgumentError when d_svd is 0 or exceeds d.
OrdinalProjection svd_project(const GramMatrix& gram, std::size_t d_svd);

EmbeddedPoints embed(const OrdinalProjection& projection, const DataMatrix& data);
EmbeddedPoints embed(const OrdinalProjection& projection, const CenterSet& centers);

}  // namespace och

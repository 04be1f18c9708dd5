#include "och/ocp.hpp"

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "och/errors.hpp"

namespace och {

namespace {

constexpr std::size_t kGramBlock = 1024;

}  // namespace

GramMatrix compute_gram(const DataMatrix& data) {
  if (data.n == 0 || data.d == 0)
    throw ArgumentError("compute_gram: empty data");
  const auto d = static_cast<Eigen::Index>(data.d);

  // Row blocks are accumulated independently, then reduced in block order so
  // the result is one fixed summation tree regardless of thread count.
  const std::size_t num_blocks = (data.n + kGramBlock - 1) / kGramBlock;
  std::vector<Eigen::MatrixXd> partial(num_blocks);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < num_blocks; ++b) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    const std::size_t lo = b * kGramBlock;
    const std::size_t hi = std::min(lo + kGramBlock, data.n);
    for (std::size_t i = lo; i < hi; ++i) {
      Eigen::Map<const Eigen::VectorXd> xi(data.row(i), d);
      acc.noalias() += xi * xi.transpose();
    }
    partial[b] = std::move(acc);
  }

  GramMatrix gram;
  gram.M = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t b = 0; b < num_blocks; ++b) gram.M += partial[b];
  return gram;
}

OrdinalProjection svd_project(const GramMatrix& gram, std::size_t d_svd) {
  const auto d = gram.M.rows();
  if (d_svd == 0) throw ArgumentError("svd_project: d_svd must be positive");
  if (static_cast<Eigen::Index>(d_svd) > d)
    throw ArgumentError("svd_project: d_svd exceeds data dimension");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram.M);
  if (solver.info() != Eigen::Success)
    throw NumericError("svd_project: eigendecomposition failed");

  // Eigen returns ascending eigenvalues; take the trailing d_svd in reverse.
  OrdinalProjection proj;
  const auto k = static_cast<Eigen::Index>(d_svd);
  proj.Z.resize(k, d);
  proj.eigenvalues.resize(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index src = d - 1 - r;
    proj.eigenvalues(r) = solver.eigenvalues()(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    proj.Z.row(r) = v.transpose();
  }
  return proj;
}

namespace {

EmbeddedPoints embed_rows(const OrdinalProjection& projection,
                          const double* values, std::size_t count,
                          std::size_t dim) {
  if (dim != projection.d())
    throw ArgumentError("embed: dimension mismatch with projection");
  EmbeddedPoints out;
  out.U.resize(static_cast<Eigen::Index>(projection.d_svd()),
               static_cast<Eigen::Index>(count));
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::Map<const Eigen::VectorXd> xi(values + i * dim,
                                         static_cast<Eigen::Index>(dim));
    out.U.col(static_cast<Eigen::Index>(i)).noalias() = projection.Z * xi;
  }
  return out;
}

}  // namespace

EmbeddedPoints embed(const OrdinalProjection& projection, const DataMatrix& data) {
  return embed_rows(projection, data.values.data(), data.n, data.d);
}

EmbeddedPoints embed(const OrdinalProjection& projection, const CenterSet& centers) {
  return embed_rows(projection, centers.centers.data(), centers.L, centers.d);
}

}  // namespace och

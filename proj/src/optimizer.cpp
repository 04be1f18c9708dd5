#include "och/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "och/errors.hpp"
#include "och/rng.hpp"

namespace och {

namespace {

constexpr std::size_t kGradBlock = 256;
constexpr std::size_t kMovingWindow = 20;

double safe_sigmoid(double z) {
  // 1 / (1 + exp(z)) without overflow for large |z|.
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void check_triplets(std::span<const Triplet> batch, std::size_t num_centers) {
  for (const auto& t : batch) {
    if (t.anchor >= num_centers || t.closer >= num_centers ||
        t.farther >= num_centers)
      throw ArgumentError("triplet index out of range of the embedded centers");
  }
}

// Batch loss and ambient gradient in one pass over [lo, hi). H and T are the
// precomputed tanh activations and their 1 - tanh^2 companions over all
// centers (r x L each). Accumulation order is the triplet order.
double accumulate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& H,
                  const Eigen::MatrixXd& T, std::span<const Triplet> batch,
                  std::size_t lo, std::size_t hi, double r_bits,
                  Eigen::MatrixXd* grad) {
  double loss = 0.0;
  for (std::size_t c = lo; c < hi; ++c) {
    const auto i = static_cast<Eigen::Index>(batch[c].anchor);
    const auto j = static_cast<Eigen::Index>(batch[c].closer);
    const auto k = static_cast<Eigen::Index>(batch[c].farther);
    const double d_ij = 0.5 * (r_bits - H.col(i).dot(H.col(j)));
    const double d_ik = 0.5 * (r_bits - H.col(i).dot(H.col(k)));
    const double p = safe_sigmoid(d_ik - d_ij);
    loss += p;
    if (grad) {
      // w * (dD_H(i,j)/dV - dD_H(i,k)/dV) with each Hamming gradient
      // -1/2 (a_i cij^T + a_j cji^T), cij = (1 - H_i^2) o H_j.
      const double half_w = 0.5 * p * (1.0 - p);
      const Eigen::VectorXd cij = T.col(i).cwiseProduct(H.col(j));
      const Eigen::VectorXd cji = T.col(j).cwiseProduct(H.col(i));
      const Eigen::VectorXd cik = T.col(i).cwiseProduct(H.col(k));
      const Eigen::VectorXd cki = T.col(k).cwiseProduct(H.col(i));
      grad->noalias() -= half_w * A.col(i) * cij.transpose();
      grad->noalias() -= half_w * A.col(j) * cji.transpose();
      grad->noalias() += half_w * A.col(i) * cik.transpose();
      grad->noalias() += half_w * A.col(k) * cki.transpose();
    }
  }
  return loss;
}

// Shared driver: loss always, gradient when grad != nullptr. Work is split
// into fixed-size blocks reduced in block order, so the result does not
// depend on the number of threads.
double batch_pass(const StiefelPoint& V, std::span<const Triplet> batch,
                  const EmbeddedPoints& centers, Eigen::MatrixXd* grad) {
  if (batch.empty()) throw ArgumentError("empty triplet batch");
  if (centers.dim() != V.d_svd())
    throw ArgumentError("embedded centers dimension does not match V");
  check_triplets(batch, centers.count());

  const Eigen::MatrixXd& A = centers.U;
  const Eigen::MatrixXd H = (V.V.transpose() * A).array().tanh().matrix();
  const Eigen::MatrixXd T = (1.0 - H.array().square()).matrix();
  const double r_bits = static_cast<double>(V.r());

  const std::size_t num_blocks = (batch.size() + kGradBlock - 1) / kGradBlock;
  if (num_blocks == 1) {
    if (grad) grad->setZero(V.V.rows(), V.V.cols());
    return accumulate(A, H, T, batch, 0, batch.size(), r_bits, grad);
  }

  std::vector<double> block_loss(num_blocks, 0.0);
  std::vector<Eigen::MatrixXd> block_grad;
  if (grad) block_grad.assign(num_blocks, Eigen::MatrixXd());
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const std::size_t lo = b * kGradBlock;
    const std::size_t hi = std::min(lo + kGradBlock, batch.size());
    Eigen::MatrixXd* g = nullptr;
    if (grad) {
      block_grad[b].setZero(V.V.rows(), V.V.cols());
      g = &block_grad[b];
    }
    block_loss[b] = accumulate(A, H, T, batch, lo, hi, r_bits, g);
  }

  double loss = 0.0;
  for (std::size_t b = 0; b < num_blocks; ++b) loss += block_loss[b];
  if (grad) {
    grad->setZero(V.V.rows(), V.V.cols());
    for (std::size_t b = 0; b < num_blocks; ++b) *grad += block_grad[b];
  }
  return loss;
}

}  // namespace

double StiefelPoint::infeasibility() const {
  const Eigen::Index k = V.rows();
  Eigen::MatrixXd gram = V * V.transpose();
  gram -= Eigen::MatrixXd::Identity(k, k);
  return gram.cwiseAbs().maxCoeff();
}

StiefelPoint init_stiefel(std::size_t d_svd, std::size_t r, std::uint64_t seed) {
  if (d_svd == 0 || r == 0)
    throw ArgumentError("init_stiefel: dimensions must be positive");
  if (r < d_svd)
    throw ArgumentError(
        "init_stiefel: r < d_svd makes VV^T = I infeasible (a d_svd x r matrix "
        "cannot have orthonormal rows with fewer columns than rows)");

  Rng rng(seed);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(d_svd), static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.gaussian();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g.transpose());
  Eigen::MatrixXd q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(r),
                                                static_cast<Eigen::Index>(d_svd));
  const Eigen::MatrixXd rr =
      qr.matrixQR().topLeftCorner(static_cast<Eigen::Index>(d_svd),
                                  static_cast<Eigen::Index>(d_svd))
          .triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const double diag = rr(c, c);
    if (diag == 0.0)
      throw NumericError("init_stiefel: degenerate Gaussian draw (rank-deficient)");
    if (diag < 0.0) q.col(c) = -q.col(c);
  }

  StiefelPoint point;
  point.V = q.transpose();
  return point;
}

Eigen::VectorXd relaxed_hash(const StiefelPoint& V, const Eigen::VectorXd& a) {
  if (a.size() != V.V.rows())
    throw ArgumentError("relaxed_hash: vector length does not match d_svd");
  return (V.V.transpose() * a).array().tanh();
}

Eigen::MatrixXd relaxed_hash_all(const StiefelPoint& V, const EmbeddedPoints& points) {
  if (points.dim() != V.d_svd())
    throw ArgumentError("relaxed_hash_all: embedded dimension does not match d_svd");
  return (V.V.transpose() * points.U).array().tanh();
}

double relaxed_hamming(const StiefelPoint& V, const Eigen::VectorXd& a_i,
                       const Eigen::VectorXd& a_j) {
  const Eigen::VectorXd hi = relaxed_hash(V, a_i);
  const Eigen::VectorXd hj = relaxed_hash(V, a_j);
  return 0.5 * (static_cast<double>(V.r()) - hi.dot(hj));
}

double sigmoid_p(const StiefelPoint& V, const Triplet& triplet,
                 const EmbeddedPoints& centers) {
  check_triplets({&triplet, 1}, centers.count());
  const Eigen::VectorXd a_i = centers.U.col(static_cast<Eigen::Index>(triplet.anchor));
  const Eigen::VectorXd a_j = centers.U.col(static_cast<Eigen::Index>(triplet.closer));
  const Eigen::VectorXd a_k = centers.U.col(static_cast<Eigen::Index>(triplet.farther));
  const double d_ij = relaxed_hamming(V, a_i, a_j);
  const double d_ik = relaxed_hamming(V, a_i, a_k);
  return safe_sigmoid(d_ik - d_ij);
}

double objective(const StiefelPoint& V, std::span<const Triplet> batch,
                 const EmbeddedPoints& centers) {
  return batch_pass(V, batch, centers, nullptr);
}

Eigen::MatrixXd grad_hamming(const StiefelPoint& V, const Eigen::VectorXd& a_i,
                             const Eigen::VectorXd& a_j) {
  const Eigen::VectorXd hi = relaxed_hash(V, a_i);
  const Eigen::VectorXd hj = relaxed_hash(V, a_j);
  const Eigen::VectorXd ti = 1.0 - hi.array().square();
  const Eigen::VectorXd tj = 1.0 - hj.array().square();
  return -0.5 * (a_i * ti.cwiseProduct(hj).transpose() +
                 a_j * tj.cwiseProduct(hi).transpose());
}

Eigen::MatrixXd grad_objective(const StiefelPoint& V,
                               std::span<const Triplet> batch,
                               const EmbeddedPoints& centers) {
  Eigen::MatrixXd grad;
  batch_pass(V, batch, centers, &grad);
  return grad;
}

Eigen::MatrixXd tangent_project(const StiefelPoint& V, const Eigen::MatrixXd& g) {
  if (g.rows() != V.V.rows() || g.cols() != V.V.cols())
    throw ArgumentError("tangent_project: shape mismatch");
  const Eigen::MatrixXd gvt = g * V.V.transpose();
  const Eigen::MatrixXd sym = 0.5 * (gvt + gvt.transpose());
  return g - sym * V.V;
}

StiefelPoint retract(const StiefelPoint& V, const Eigen::MatrixXd& delta) {
  if (delta.rows() != V.V.rows() || delta.cols() != V.V.cols())
    throw ArgumentError("retract: shape mismatch");
  if (delta.isZero(0.0)) return V;

  const Eigen::MatrixXd a = V.V + delta;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > smax * 1e-13))
    throw DegenerateStepError("retract: V + delta lost row rank");

  StiefelPoint out;
  out.V = svd.matrixU() * svd.matrixV().transpose();
  return out;
}

std::pair<StiefelPoint, TrainTrace> train(const EmbeddedPoints& embedded_centers,
                                          const TripletSet& triplets,
                                          std::size_t r,
                                          const TrainConfig& config) {
  if (triplets.triplets.empty()) throw ArgumentError("train: no triplets");
  if (!(config.eta > 0.0)) throw ArgumentError("train: eta must be positive");
  if (config.batch_size < 1) throw ArgumentError("train: batch_size must be >= 1");
  if (!(config.tol >= 0.0 && config.tol < 1.0))
    throw ArgumentError("train: tol must lie in [0, 1)");
  if (config.max_iters < 1) throw ArgumentError("train: max_iters must be >= 1");
  if (config.eval_every < 1) throw ArgumentError("train: eval_every must be >= 1");
  check_triplets(triplets.triplets, embedded_centers.count());

  const std::size_t d_svd = embedded_centers.dim();
  StiefelPoint V = init_stiefel(d_svd, r, config.seed);

  TrainTrace trace;
  trace.max_infeasibility = V.infeasibility();

  const std::size_t total = triplets.triplets.size();
  const std::size_t batch_size = std::min(config.batch_size, total);
  std::vector<std::uint32_t> perm(total);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng batch_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  batch_rng.shuffle(perm);
  std::size_t cursor = 0;

  std::vector<Triplet> batch(batch_size);
  std::vector<double> window;
  window.reserve(kMovingWindow);
  double prev_avg = std::numeric_limits<double>::quiet_NaN();
  double last_mean = std::numeric_limits<double>::quiet_NaN();

  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  std::size_t iter = 0;
  for (; iter < config.max_iters; ++iter) {
    if (cursor + batch_size > total) {
      batch_rng.shuffle(perm);  // leftover shorter than a batch is dropped
      cursor = 0;
    }
    for (std::size_t b = 0; b < batch_size; ++b)
      batch[b] = triplets.triplets[perm[cursor + b]];
    cursor += batch_size;

    Eigen::MatrixXd grad;
    const double batch_loss = batch_pass(V, batch, embedded_centers, &grad);
    const Eigen::MatrixXd step = tangent_project(V, -grad);

    double eta = config.eta;
    StiefelPoint next;
    bool stepped = false;
    for (int attempt = 0; attempt <= 10; ++attempt) {
      try {
        next = retract(V, eta * step);
        stepped = true;
        break;
      } catch (const DegenerateStepError&) {
        if (attempt == 10) throw;
        eta *= 0.5;
      }
    }
    if (!stepped)
      throw DegenerateStepError("train: step remained degenerate after 10 halvings");
    V = std::move(next);
    trace.max_infeasibility = std::max(trace.max_infeasibility, V.infeasibility());

    const std::size_t iteration = iter + 1;
    const double mean_loss = batch_loss / static_cast<double>(batch_size);
    last_mean = mean_loss;
    if (iteration % config.eval_every == 0 || iteration == 1 ||
        iteration == config.max_iters) {
      TraceEntry entry;
      entry.iteration = iteration;
      entry.batch_objective = mean_loss;
      entry.full_objective = std::numeric_limits<double>::quiet_NaN();
      if (config.record_full_objective)
        entry.full_objective = objective(V, triplets.triplets, embedded_centers) /
                               static_cast<double>(total);
      entry.seconds = elapsed();
      trace.entries.push_back(entry);
    }

    // Early stop when consecutive non-overlapping 20-iteration averages of
    // the batch objective stop moving.
    window.push_back(mean_loss);
    if (window.size() == kMovingWindow) {
      const double avg =
          std::accumulate(window.begin(), window.end(), 0.0) / kMovingWindow;
      window.clear();
      if (!std::isnan(prev_avg) && config.tol > 0.0) {
        const double denom = std::max(std::abs(prev_avg), 1e-12);
        if (std::abs(avg - prev_avg) / denom < config.tol) {
          trace.early_stopped = true;
          ++iter;
          break;
        }
      }
      prev_avg = avg;
    }
  }
  trace.iterations_run = iter;

  if (trace.entries.empty() || trace.entries.back().iteration != iter) {
    TraceEntry entry;
    entry.iteration = iter;
    entry.batch_objective = last_mean;
    entry.full_objective = std::numeric_limits<double>::quiet_NaN();
    entry.seconds = elapsed();
    if (trace.entries.empty() || trace.entries.back().iteration < entry.iteration)
      trace.entries.push_back(entry);
  }
  return {std::move(V), std::move(trace)};
}

void write_trace(const std::string& path, const TrainTrace& trace) {
  std::ofstream file(path);
  if (!file) throw FormatError("write_trace: cannot open " + path);
  bool has_full = false;
  for (const auto& e : trace.entries)
    if (!std::isnan(e.full_objective)) has_full = true;
  file << "iteration,objective,seconds";
  if (has_full) file << ",full_objective";
  file << "\n";
  file.precision(17);
  for (const auto& e : trace.entries) {
    file << e.iteration << ',' << e.batch_objective << ',' << e.seconds;
    if (has_full) file << ',' << e.full_objective;
    file << "\n";
  }
  if (!file) throw FormatError("write_trace: write failed for " + path);
}

}  // namespace och

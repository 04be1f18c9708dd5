#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "och/ocp.hpp"
#include "och/ordinal_graph.hpp"

namespace och {

/// A point on the manifold of row-orthonormal d_svd x r matrices:
/// V V^T = I(d_svd), kept within 1e-8 at every externally visible moment.
struct StiefelPoint {
  Eigen::MatrixXd V;

  std::size_t d_svd() const { return static_cast<std::size_t>(V.rows()); }
  std::size_t r() const { return static_cast<std::size_t>(V.cols()); }

  /// max |VV^T - I|, the feasibility residual.
  double infeasibility() const;
};

struct TrainConfig {
  double eta = 0.01;
  std::size_t max_iters = 500;
  std::size_t batch_size = 2000;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  std::size_t eval_every = 10;
  bool record_full_objective = false;
};

struct TraceEntry {
  std::size_t iteration;    // 1-based update count
  double batch_objective;   // mean sigmoid loss over the iteration's batch
  double full_objective;    // mean over all triplets; NaN when not recorded
  double seconds;           // wall clock since training started
};

struct TrainTrace {
  std::vector<TraceEntry> entries;
  double max_infeasibility = 0.0;  // max over iterations of |VV^T - I|_inf
  std::size_t iterations_run = 0;
  bool early_stopped = false;
};

/// Gaussian-filled d_svd x r matrix with rows orthonormalized by a thin QR
/// factorization (sign-fixed, so the result is unique and seed-deterministic).
/// Requires r >= d_svd, otherwise VV^T = I is infeasible.
StiefelPoint init_stiefel(std::size_t d_svd, std::size_t r, std::uint64_t seed);

/// tanh(V^T a): the smooth surrogate for the r-bit code of an embedded point.
Eigen::VectorXd relaxed_hash(const StiefelPoint& V, const Eigen::VectorXd& a);

/// Column-wise relaxed_hash over a set of embedded points (r x m).
Eigen::MatrixXd relaxed_hash_all(const StiefelPoint& V, const EmbeddedPoints& points);

/// (r - H(a_i).H(a_j)) / 2, the smooth Hamming distance in [0, r].
double relaxed_hamming(const StiefelPoint& V, const Eigen::VectorXd& a_i,
                       const Eigen::VectorXd& a_j);

/// 1 / (1 + exp(D_H(i,k) - D_H(i,j))) for a triplet (anchor i; closer j,
/// farther k): below 1/2 exactly when the relaxed distances already rank
/// j ahead of k. Overflow-safe for any gap.
double sigmoid_p(const StiefelPoint& V, const Triplet& triplet,
                 const EmbeddedPoints& centers);

/// Sum of sigmoid_p over the batch. Throws ArgumentError on an empty batch.
double objective(const StiefelPoint& V, std::span<const Triplet> batch,
                 const EmbeddedPoints& centers);

/// Derivative of relaxed_hamming with respect to V (d_svd x r):
/// -1/2 [ a_i ((1-H(a_i)^2) o H(a_j))^T + a_j ((1-H(a_j)^2) o H(a_i))^T ].
Eigen::MatrixXd grad_hamming(const StiefelPoint& V, const Eigen::VectorXd& a_i,
                             const Eigen::VectorXd& a_j);

/// Ambient-space gradient of objective() over the batch: for each triplet,
/// p(1-p) [ dD_H(i,j)/dV - dD_H(i,k)/dV ]. Matches central finite
/// differences of objective(); deterministic for any thread count.
Eigen::MatrixXd grad_objective(const StiefelPoint& V,
                               std::span<const Triplet> batch,
                               const EmbeddedPoints& centers);

/// Projection of an ambient matrix onto the tangent space at V:
/// P(G) = G - sym(G V^T) V with sym(A) = (A + A^T)/2.
Eigen::MatrixXd tangent_project(const StiefelPoint& V, const Eigen::MatrixXd& g);

/// Polar retraction: the row-orthonormal factor of V + delta. retract(V, 0)
/// returns V exactly. Throws DegenerateStepError when V + delta loses row
/// rank (callers halve the step and retry).
StiefelPoint retract(const StiefelPoint& V, const Eigen::MatrixXd& delta);

/// Stochastic descent on the manifold: per iteration draw a batch of
/// triplets (without replacement, reshuffled each epoch), step along
/// eta * P(-grad), retract. Stops at max_iters or when the relative change
/// of a 20-iteration moving average of the batch objective drops below tol
/// (tol = 0 disables early stopping). Deterministic per seed.
std::pair<StiefelPoint, TrainTrace> train(const EmbeddedPoints& embedded_centers,
                                          const TripletSet& triplets,
                                          std::size_t r,
                                          const TrainConfig& config);

/// CSV export: iteration,objective,seconds[,full_objective].
void write_trace(const std::string& path, const TrainTrace& trace);

}  // namespace och

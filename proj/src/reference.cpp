#include "och/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "och/errors.hpp"

namespace och::reference {

namespace {

double dist_sq(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t t = 0; t < dim; ++t) {
    const double diff = a[t] - b[t];
    acc += diff * diff;
  }
  return acc;
}

std::vector<double> tanh_of(const Eigen::MatrixXd& v, const double* a) {
  // tanh(V^T a) with explicit scalar loops.
  const auto d = static_cast<std::size_t>(v.rows());
  const auto r = static_cast<std::size_t>(v.cols());
  std::vector<double> h(r);
  for (std::size_t k = 0; k < r; ++k) {
    double dot = 0.0;
    for (std::size_t s = 0; s < d; ++s)
      dot += v(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) * a[s];
    h[k] = std::tanh(dot);
  }
  return h;
}

double relaxed_dist(const std::vector<double>& hi, const std::vector<double>& hj) {
  double dot = 0.0;
  for (std::size_t k = 0; k < hi.size(); ++k) dot += hi[k] * hj[k];
  return 0.5 * (static_cast<double>(hi.size()) - dot);
}

}  // namespace

Eigen::MatrixXd gram(const DataMatrix& data) {
  const auto d = static_cast<Eigen::Index>(data.d);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < data.n; ++i) {
    const double* x = data.row(i);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) m(a, b) += x[a] * x[b];
  }
  return m;
}

AffinityGraph affinity(const double* points, std::size_t count, std::size_t dim,
                       double sigma) {
  AffinityGraph graph;
  graph.sigma = sigma;
  graph.S.setZero(static_cast<Eigen::Index>(count),
                  static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      if (i != j)
        graph.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::exp(-dist_sq(points + i * dim, points + j * dim, dim) /
                     (2.0 * sigma * sigma));
  return graph;
}

TripletSet triplets_by_distance(const double* points, std::size_t count,
                                std::size_t dim) {
  TripletSet out;
  out.num_centers = count;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j) {
      if (j == i) continue;
      const double dij = dist_sq(points + i * dim, points + j * dim, dim);
      for (std::size_t k = 0; k < count; ++k) {
        if (k == i || k == j) continue;
        const double dik = dist_sq(points + i * dim, points + k * dim, dim);
        if (dij < dik)
          out.triplets.push_back({static_cast<std::uint32_t>(i),
                                  static_cast<std::uint32_t>(j),
                                  static_cast<std::uint32_t>(k)});
      }
    }
  return out;
}

double objective(const StiefelPoint& V, std::span<const Triplet> batch,
                 const EmbeddedPoints& centers) {
  if (batch.empty()) throw ArgumentError("reference::objective: empty batch");
  double total = 0.0;
  for (const auto& t : batch) {
    const auto hi = tanh_of(V.V, centers.U.col(t.anchor).data());
    const auto hj = tanh_of(V.V, centers.U.col(t.closer).data());
    const auto hk = tanh_of(V.V, centers.U.col(t.farther).data());
    const double gap = relaxed_dist(hi, hk) - relaxed_dist(hi, hj);
    total += 1.0 / (1.0 + std::exp(gap));
  }
  return total;
}

Eigen::MatrixXd grad_objective(const StiefelPoint& V,
                               std::span<const Triplet> batch,
                               const EmbeddedPoints& centers) {
  if (batch.empty())
    throw ArgumentError("reference::grad_objective: empty batch");
  const auto d = static_cast<std::size_t>(V.V.rows());
  const auto r = static_cast<std::size_t>(V.V.cols());
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                               static_cast<Eigen::Index>(r));
  for (const auto& t : batch) {
    const double* ai = centers.U.col(t.anchor).data();
    const double* aj = centers.U.col(t.closer).data();
    const double* ak = centers.U.col(t.farther).data();
    const auto hi = tanh_of(V.V, ai);
    const auto hj = tanh_of(V.V, aj);
    const auto hk = tanh_of(V.V, ak);
    const double gap = relaxed_dist(hi, hk) - relaxed_dist(hi, hj);
    const double p = 1.0 / (1.0 + std::exp(gap));
    const double w = p * (1.0 - p);
    for (std::size_t s = 0; s < d; ++s) {
      for (std::size_t k = 0; k < r; ++k) {
        const double g_ij = -0.5 * (ai[s] * (1.0 - hi[k] * hi[k]) * hj[k] +
                                    aj[s] * (1.0 - hj[k] * hj[k]) * hi[k]);
        const double g_ik = -0.5 * (ai[s] * (1.0 - hi[k] * hi[k]) * hk[k] +
                                    ak[s] * (1.0 - hk[k] * hk[k]) * hi[k]);
        grad(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) +=
            w * (g_ij - g_ik);
      }
    }
  }
  return grad;
}

BinaryCodes encode(const HashModel& model, const DataMatrix& points) {
  if (points.d != model.d)
    throw ArgumentError("reference::encode: dimension mismatch");
  BinaryCodes codes;
  codes.n = points.n;
  codes.r = model.r;
  codes.words_per_code = (model.r + 63) / 64;
  codes.words.assign(codes.n * codes.words_per_code, 0u);
  for (std::size_t i = 0; i < points.n; ++i) {
    const double* x = points.row(i);
    std::uint64_t* row = codes.words.data() + i * codes.words_per_code;
    for (std::size_t k = 0; k < model.r; ++k) {
      double dot = 0.0;
      for (std::size_t s = 0; s < model.d; ++s)
        dot += model.W(static_cast<Eigen::Index>(s),
                       static_cast<Eigen::Index>(k)) *
               x[s];
      if (dot > 0.0) row[k / 64] |= std::uint64_t{1} << (k % 64);
    }
  }
  return codes;
}

std::uint32_t hamming(const BinaryCodes& codes, std::size_t i, std::size_t j) {
  std::uint32_t dist = 0;
  for (std::size_t k = 0; k < codes.r; ++k)
    if (codes.bit(i, k) != codes.bit(j, k)) ++dist;
  return dist;
}

GroundTruth groundtruth(const DataMatrix& queries, const DataMatrix& base,
                        double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ArgumentError("reference::groundtruth: fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(base.n)));
  GroundTruth truth;
  truth.fraction = fraction;
  truth.relevant.resize(queries.n);
  for (std::size_t q = 0; q < queries.n; ++q) {
    std::vector<std::pair<double, std::uint32_t>> dists(base.n);
    for (std::size_t b = 0; b < base.n; ++b)
      dists[b] = {dist_sq(queries.row(q), base.row(b), base.d),
                  static_cast<std::uint32_t>(b)};
    std::sort(dists.begin(), dists.end());
    std::vector<std::uint32_t> rel(k);
    for (std::size_t t = 0; t < k; ++t) rel[t] = dists[t].second;
    std::sort(rel.begin(), rel.end());
    truth.relevant[q] = std::move(rel);
  }
  return truth;
}

std::vector<std::uint32_t> hamming_rank(const BinaryCodes& query_codes,
                                        std::size_t query_index,
                                        const BinaryCodes& base_codes) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order(base_codes.n);
  for (std::size_t b = 0; b < base_codes.n; ++b) {
    std::uint32_t dist = 0;
    for (std::size_t k = 0; k < base_codes.r; ++k)
      if (query_codes.bit(query_index, k) != base_codes.bit(b, k)) ++dist;
    order[b] = {dist, static_cast<std::uint32_t>(b)};
  }
  std::sort(order.begin(), order.end());
  std::vector<std::uint32_t> out(base_codes.n);
  for (std::size_t b = 0; b < base_codes.n; ++b) out[b] = order[b].second;
  return out;
}

}  // namespace och::reference

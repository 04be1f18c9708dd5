// Times the OpenMP kernels against their serial reference twins on a
// synthetic workload and prints a small table. Not a correctness check
// (the test suite owns that) — a quick way to see what parallelism buys.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "och/clustering.hpp"
#include "och/dataset.hpp"
#include "och/encoder.hpp"
#include "och/evaluation.hpp"
#include "och/ocp.hpp"
#include "och/optimizer.hpp"
#include "och/ordinal_graph.hpp"
#include "och/reference.hpp"

namespace {

double time_of(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial_s, double parallel_s) {
  std::printf("%-22s %10.4f s %10.4f s %8.2fx\n", name.c_str(), serial_s,
              parallel_s, serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns are serial\n");
#endif

  const std::size_t n = 20000, d = 64, L = 120;
  och::DataMatrix data = och::preprocess(och::gen_synthetic(10, n, d, 0.5, 7));

  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial", "parallel", "speedup");

  time_of([&] { och::compute_gram(data); }, 1);  // warm up allocators
  row("gram (20k x 64)", time_of([&] { och::reference::gram(data); }, 3),
      time_of([&] { och::compute_gram(data); }, 3));

  och::CenterSet centers = och::kmeans(data, L, 10, 7);
  const double sigma = och::select_sigma(centers);
  row("affinity (120)",
      time_of([&] { och::reference::affinity(centers.centers.data(), L, d, sigma); }, 3),
      time_of([&] { och::build_affinity(centers, sigma); }, 3));

  och::AffinityGraph aff = och::build_affinity(centers, sigma);
  och::DissimilarityGraph dis = och::build_dissimilarity(aff);
  och::TripletSet triplets = och::extract_triplets(aff, dis);
  std::printf("  (triplets: %zu)\n", triplets.triplets.size());

  och::GramMatrix gram = och::compute_gram(data);
  och::OrdinalProjection proj = och::svd_project(gram, 16);
  och::EmbeddedPoints embedded = och::embed(proj, centers);
  och::StiefelPoint v = och::init_stiefel(16, 64, 7);
  const std::size_t grad_count = std::min<std::size_t>(triplets.triplets.size(), 50000);
  std::span<const och::Triplet> batch(triplets.triplets.data(), grad_count);
  row("gradient (50k trip)",
      time_of([&] { och::reference::grad_objective(v, batch, embedded); }, 3),
      time_of([&] { och::grad_objective(v, batch, embedded); }, 3));

  och::HashModel model = och::build_och_model(proj, v, 64);
  row("encode (20k x 64b)", time_of([&] { och::reference::encode(model, data); }, 3),
      time_of([&] { och::encode(model, data); }, 3));

  och::DataSplit s = och::split(data, 500, 0, 7);
  row("groundtruth (500q)",
      time_of([&] { och::reference::groundtruth(s.queries, s.base, 0.02); }, 2),
      time_of([&] { och::build_groundtruth(s.queries, s.base, 0.02); }, 2));

  return 0;
}

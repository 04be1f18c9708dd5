#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <set>
#include <vector>

#include "doctest.h"
#include "och/clustering.hpp"
#include "och/dataset.hpp"
#include "och/errors.hpp"
#include "test_util.hpp"

using test_util::make_matrix;

TEST_CASE("kmeans with L equal to n puts every distinct point on its own center") {
  och::DataMatrix data =
      make_matrix(4, 2, {0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 5.0, 5.0});
  och::CenterSet cs = och::kmeans(data, 4, 50, 0);

  CHECK(cs.inertia == 0.0);
  std::set<std::uint32_t> used(cs.assignments.begin(), cs.assignments.end());
  CHECK(used.size() == 4);
  for (std::size_t i = 0; i < data.n; ++i) {
    CHECK(std::memcmp(data.row(i), cs.center(cs.assignments[i]),
                      data.d * sizeof(double)) == 0);
  }
}

TEST_CASE("kmeans on identical points collapses to that point") {
  och::DataMatrix data = make_matrix(5, 2, {3.0, -1.0, 3.0, -1.0, 3.0, -1.0,
                                            3.0, -1.0, 3.0, -1.0});
  och::CenterSet cs = och::kmeans(data, 1, 10, 1);
  CHECK(cs.inertia == doctest::Approx(0.0));
  CHECK(cs.center(0)[0] == doctest::Approx(3.0));
  CHECK(cs.center(0)[1] == doctest::Approx(-1.0));
}

TEST_CASE("kmeans recovers well-separated cluster means") {
  std::vector<double> means;
  och::DataMatrix data = och::gen_synthetic(2, 1000, 2, 0.01, 1, &means);
  och::CenterSet cs = och::kmeans(data, 2, 100, 0);

  // Match each true mean to its nearest recovered center.
  for (std::size_t c = 0; c < 2; ++c) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      double ds = 0.0;
      for (std::size_t j = 0; j < 2; ++j) {
        double t = means[c * 2 + j] - cs.center(k)[j];
        ds += t * t;
      }
      if (ds < best) {
        best = ds;
        best_k = k;
      }
    }
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(means[c * 2 + j] - cs.center(best_k)[j]) < 0.01);
    }
  }
}

TEST_CASE("kmeans inertia history never increases") {
  och::DataMatrix data = och::gen_synthetic(6, 400, 8, 0.6, 3);
  och::CenterSet cs = och::kmeans(data, 12, 100, 5);
  REQUIRE(cs.inertia_history.size() >= 2);
  for (std::size_t i = 1; i < cs.inertia_history.size(); ++i) {
    CHECK(cs.inertia_history[i] <= cs.inertia_history[i - 1] + 1e-9);
  }
  CHECK(cs.inertia == cs.inertia_history.back());
}

TEST_CASE("kmeans centers are the means of their assigned points") {
  och::DataMatrix data = och::gen_synthetic(5, 300, 4, 0.3, 9);
  och::CenterSet cs = och::kmeans(data, 5, 100, 2);

  std::vector<double> sums(cs.L * cs.d, 0.0);
  std::vector<std::size_t> counts(cs.L, 0);
  for (std::size_t i = 0; i < data.n; ++i) {
    std::uint32_t c = cs.assignments[i];
    for (std::size_t k = 0; k < cs.d; ++k) sums[c * cs.d + k] += data.row(i)[k];
    ++counts[c];
  }
  for (std::size_t c = 0; c < cs.L; ++c) {
    REQUIRE(counts[c] > 0);
    for (std::size_t k = 0; k < cs.d; ++k) {
      CHECK(std::abs(cs.center(c)[k] -
                     sums[c * cs.d + k] / static_cast<double>(counts[c])) <
            1e-9);
    }
  }
}

TEST_CASE("kmeans reported inertia matches a direct recomputation") {
  och::DataMatrix data = och::gen_synthetic(3, 150, 6, 0.4, 4);
  och::CenterSet cs = och::kmeans(data, 6, 100, 7);
  double inertia = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const double* center = cs.center(cs.assignments[i]);
    for (std::size_t k = 0; k < data.d; ++k) {
      double t = data.row(i)[k] - center[k];
      inertia += t * t;
    }
  }
  CHECK(inertia == doctest::Approx(cs.inertia).epsilon(1e-12));
}

TEST_CASE("kmeans assigns each point to its nearest center") {
  och::DataMatrix data = och::gen_synthetic(4, 200, 5, 0.5, 6);
  och::CenterSet cs = och::kmeans(data, 8, 100, 3);
  for (std::size_t i = 0; i < data.n; ++i) {
    double assigned = 0.0;
    for (std::size_t k = 0; k < data.d; ++k) {
      double t = data.row(i)[k] - cs.center(cs.assignments[i])[k];
      assigned += t * t;
    }
    for (std::size_t c = 0; c < cs.L; ++c) {
      double ds = 0.0;
      for (std::size_t k = 0; k < data.d; ++k) {
        double t = data.row(i)[k] - cs.center(c)[k];
        ds += t * t;
      }
      CHECK(assigned <= ds + 1e-12);
    }
  }
}

TEST_CASE("kmeans is deterministic per seed") {
  och::DataMatrix data = och::gen_synthetic(4, 250, 6, 0.4, 8);
  och::CenterSet a = och::kmeans(data, 10, 100, 13);
  och::CenterSet b = och::kmeans(data, 10, 100, 13);
  CHECK(a.centers == b.centers);
  CHECK(a.assignments == b.assignments);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("kmeans validates its arguments") {
  och::DataMatrix data = och::gen_synthetic(2, 10, 3, 0.3, 1);
  CHECK_THROWS_AS(och::kmeans(data, 0, 10, 0), och::ArgumentError);
  CHECK_THROWS_AS(och::kmeans(data, 11, 10, 0), och::ArgumentError);
  CHECK_THROWS_AS(och::kmeans(data, 2, 0, 0), och::ArgumentError);
}

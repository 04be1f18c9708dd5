#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "och/dataset.hpp"
#include "och/encoder.hpp"
#include "och/errors.hpp"
#include "och/evaluation.hpp"
#include "och/ocp.hpp"
#include "och/optimizer.hpp"
#include "och/pipeline.hpp"
#include "och/rng.hpp"

namespace {

double mean_ap(const och::BinaryCodes& qc, const och::BinaryCodes& bc,
               const och::GroundTruth& gt) {
  return och::evaluate_codes(qc, bc, gt).map;
}

}  // namespace

TEST_CASE("training the projection improves retrieval over its initialization") {
  // 10 overlapping Gaussians; anchors carry the cluster geometry, so the
  // learned V should beat the random starting point on average.
  double trained_sum = 0.0;
  double init_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    och::DataMatrix data =
        och::preprocess(och::gen_synthetic(10, 2000, 32, 1.0, seed));
    och::DataSplit split = och::split(data, 200, 1200, seed);
    och::GroundTruth gt =
        och::build_groundtruth(split.queries, split.base, 0.02);

    och::PipelineConfig cfg;
    cfg.centers = 50;
    cfg.kmeans_iters = 100;
    cfg.d_svd = 16;
    cfg.train.eta = 0.05;
    cfg.train.max_iters = 200;
    cfg.train.batch_size = 2000;
    cfg.train.tol = 0.0;
    cfg.train.seed = seed;

    och::PipelineArtifacts artifacts;
    och::HashModel trained = och::train_och_model(split.train, 32, cfg,
                                                  &artifacts);
    och::HashModel init = och::build_och_model(
        artifacts.projection, och::init_stiefel(16, 32, seed), 32);

    trained_sum += mean_ap(och::encode(trained, split.queries),
                           och::encode(trained, split.base), gt);
    init_sum += mean_ap(och::encode(init, split.queries),
                        och::encode(init, split.base), gt);
  }
  CHECK(trained_sum / 5.0 > init_sum / 5.0);
}

TEST_CASE("random projections rank far better than random order") {
  och::DataMatrix data =
      och::preprocess(och::gen_synthetic(10, 3000, 32, 0.3, 7));
  och::DataSplit split = och::split(data, 200, 2000, 8);
  och::GroundTruth gt = och::build_groundtruth(split.queries, split.base, 0.02);

  och::HashModel lsh = och::build_lsh_model(32, 32, 9);
  double lsh_map = mean_ap(och::encode(lsh, split.queries),
                           och::encode(lsh, split.base), gt);

  // Shuffled-ranking oracle: the mAP floor of ignoring the codes entirely.
  och::Rng rng(10);
  double shuffled_sum = 0.0;
  for (std::size_t q = 0; q < gt.num_queries(); ++q) {
    std::vector<std::uint32_t> ranking(split.base.n);
    std::iota(ranking.begin(), ranking.end(), 0u);
    rng.shuffle(ranking);
    shuffled_sum += och::average_precision(ranking, gt.relevant[q]);
  }
  double shuffled_map = shuffled_sum / static_cast<double>(gt.num_queries());

  CHECK(lsh_map > shuffled_map);
}

TEST_CASE("the training pipeline is deterministic end to end") {
  och::DataMatrix data =
      och::preprocess(och::gen_synthetic(5, 600, 16, 0.8, 11));
  och::PipelineConfig cfg;
  cfg.centers = 30;
  cfg.kmeans_iters = 40;
  cfg.d_svd = 8;
  cfg.train.max_iters = 40;
  cfg.train.batch_size = 1000;
  cfg.train.seed = 12;

  och::HashModel a = och::train_och_model(data, 24, cfg);
  och::HashModel b = och::train_och_model(data, 24, cfg);
  CHECK(a.W == b.W);
  CHECK(a.Z == b.Z);
  CHECK(a.V == b.V);
}

TEST_CASE("the pipeline reports its intermediate artifacts") {
  och::DataMatrix data =
      och::preprocess(och::gen_synthetic(4, 500, 12, 0.7, 13));
  och::PipelineConfig cfg;
  cfg.centers = 20;
  cfg.kmeans_iters = 30;
  cfg.d_svd = 6;
  cfg.train.max_iters = 30;
  cfg.train.batch_size = 500;
  cfg.train.seed = 14;

  och::PipelineArtifacts artifacts;
  och::HashModel model = och::train_och_model(data, 16, cfg, &artifacts);

  CHECK(model.d == 12);
  CHECK(model.d_svd == 6);
  CHECK(model.r == 16);
  CHECK(artifacts.sigma > 0.0);
  CHECK(artifacts.center_set.L == 20);
  CHECK(artifacts.triplets.num_centers == 20);
  CHECK(!artifacts.triplets.triplets.empty());
  CHECK(!artifacts.trace.entries.empty());
  CHECK(artifacts.trace.max_infeasibility < 1e-8);
  CHECK(artifacts.projection.d_svd() == 6);
  CHECK(artifacts.projection.d() == 12);
}

TEST_CASE("the pipeline validates its configuration before any work") {
  och::DataMatrix data =
      och::preprocess(och::gen_synthetic(3, 200, 8, 0.6, 15));
  och::PipelineConfig cfg;
  cfg.centers = 20;
  cfg.d_svd = 4;

  SUBCASE("bits below the embedded dimension") {
    CHECK_THROWS_AS(och::train_och_model(data, 2, cfg), och::ArgumentError);
  }
  SUBCASE("embedded dimension beyond the data") {
    cfg.d_svd = 9;
    CHECK_THROWS_AS(och::train_och_model(data, 16, cfg), och::ArgumentError);
  }
  SUBCASE("more centers than points") {
    cfg.centers = 300;
    CHECK_THROWS_AS(och::train_och_model(data, 16, cfg), och::ArgumentError);
  }
  SUBCASE("too few centers to form a triplet") {
    cfg.centers = 2;
    CHECK_THROWS_AS(och::train_och_model(data, 16, cfg), och::ArgumentError);
  }
  SUBCASE("empty training data") {
    och::DataMatrix empty;
    CHECK_THROWS_AS(och::train_och_model(empty, 16, cfg), och::ArgumentError);
  }
}

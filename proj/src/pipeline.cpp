#include "och/pipeline.hpp"

#include "och/errors.hpp"

namespace och {

HashModel train_och_model(const DataMatrix& train_data, std::size_t r,
                          const PipelineConfig& config,
                          PipelineArtifacts* artifacts) {
  if (train_data.n == 0 || train_data.d == 0)
    throw ArgumentError("train_och_model: empty training data");
  if (config.d_svd > train_data.d)
    throw ArgumentError("train_och_model: d_svd exceeds data dimension");
  if (r < config.d_svd)
    throw ArgumentError("train_och_model: r must be >= d_svd for VV^T = I");
  if (config.centers > train_data.n)
    throw ArgumentError("train_och_model: more centers than training points");
  if (config.centers < 3)
    throw ArgumentError("train_och_model: need at least 3 centers for triplets");

  CenterSet centers = kmeans(train_data, config.centers, config.kmeans_iters,
                             config.train.seed);

  GramMatrix gram = compute_gram(train_data);
  OrdinalProjection projection = svd_project(gram, config.d_svd);
  EmbeddedPoints embedded = embed(projection, centers);

  const double sigma = select_sigma(centers);
  AffinityGraph affinity = build_affinity(centers, sigma);
  DissimilarityGraph dissimilarity = build_dissimilarity(affinity);
  TripletSet triplets = extract_triplets(affinity, dissimilarity);

  auto [v, trace] = train(embedded, triplets, r, config.train);
  HashModel model = build_och_model(projection, v, r);

  if (artifacts) {
    artifacts->center_set = std::move(centers);
    artifacts->projection = std::move(projection);
    artifacts->triplets = std::move(triplets);
    artifacts->trace = std::move(trace);
    artifacts->sigma = sigma;
  }
  return model;
}

}  // namespace och

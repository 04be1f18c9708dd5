#pragma once

#include <cstddef>

#include "och/clustering.hpp"
#include "och/dataset.hpp"
#include "och/encoder.hpp"
#include "och/ocp.hpp"
#include "och/optimizer.hpp"
#include "och/ordinal_graph.hpp"

namespace och {

struct PipelineConfig {
  std::size_t centers = 300;      // anchor count L
  std::size_t kmeans_iters = 100;
  std::size_t d_svd = 16;
  TrainConfig train;
};

/// Intermediate products of train_och_model, for callers that want the
/// trace or the triplet counts.
struct PipelineArtifacts {
  CenterSet center_set;
  OrdinalProjection projection;
  TripletSet triplets;
  TrainTrace trace;
  double sigma = 0.0;
};

/// The full training pipeline: k-means anchors -> Gram spectrum projection ->
/// embedded anchors -> ordinal triplets -> manifold descent -> hash model.
/// Validates r >= d_svd, d_svd <= d, centers <= n before any work.
HashModel train_och_model(const DataMatrix& train_data, std::size_t r,
                          const PipelineConfig& config,
                          PipelineArtifacts* artifacts = nullptr);

}  // namespace och

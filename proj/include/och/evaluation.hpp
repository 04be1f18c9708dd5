#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "och/dataset.hpp"
#include "och/encoder.hpp"
#include "och/pipeline.hpp"

namespace och {

/// Per-query relevant sets: the top ceil(fraction * |base|) base points by
/// exact Euclidean distance, ties broken by lower index. Indices sorted.
struct GroundTruth {
  std::vector<std::vector<std::uint32_t>> relevant;
  double fraction = 0.0;

  std::size_t num_queries() const { return relevant.size(); }
};

GroundTruth build_groundtruth(const DataMatrix& queries, const DataMatrix& base,
                              double fraction);

/// Base indices sorted by ascending Hamming distance to the query code,
/// ties broken by ascending index.
std::vector<std::uint32_t> hamming_rank(const BinaryCodes& query_codes,
                                        std::size_t query_index,
                                        const BinaryCodes& base_codes);

/// (1/|relevant|) * sum over hits of precision at the hit's rank.
double average_precision(const std::vector<std::uint32_t>& ranking,
                         const std::vector<std::uint32_t>& relevant);

/// |top-K intersect relevant| / K  and  / |relevant|. Requires 1 <= K <= |ranking|.
double precision_at(const std::vector<std::uint32_t>& ranking,
                    const std::vector<std::uint32_t>& relevant, std::size_t k);
double recall_at(const std::vector<std::uint32_t>& ranking,
                 const std::vector<std::uint32_t>& relevant, std::size_t k);

/// 1-2-5 series (1, 2, 5, 10, 20, 50, ...) capped at base_size, with
/// base_size itself appended so every curve reaches recall 1.
std::vector<std::size_t> recall_k_grid(std::size_t base_size);

enum class Method { Och, Lsh };

std::string method_name(Method method);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ReportCell {
  Method method;
  std::size_t bits = 0;
  MetricStats map;
  MetricStats pre100;
  std::vector<std::pair<std::size_t, MetricStats>> recall_curve;
  MetricStats train_seconds;
  MetricStats encode_seconds;
};

struct BenchmarkReport {
  std::vector<ReportCell> cells;
  std::size_t repetitions = 0;
  std::vector<std::uint64_t> seeds;
  std::size_t n_query = 0;
  std::size_t n_base = 0;
  std::size_t n_train = 0;
  double fraction = 0.0;
};

struct BenchConfig {
  std::size_t n_query = 2000;
  std::size_t n_train = 10000;
  double fraction = 0.02;
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  PipelineConfig pipeline;
};

/// Aggregate retrieval quality of one code set against a ground truth:
/// mean AP, mean precision@min(100,|base|), mean recall at each grid K.
struct CodeMetrics {
  double map = 0.0;
  double pre100 = 0.0;
  std::vector<std::pair<std::size_t, double>> recall_curve;
};

CodeMetrics evaluate_codes(const BinaryCodes& query_codes,
                           const BinaryCodes& base_codes,
                           const GroundTruth& truth);

/// The full protocol: per repetition draw a fresh split, train each method
/// at each bit length, encode, score; report per-cell mean and standard
/// deviation over repetitions.
BenchmarkReport run_benchmark(const DataMatrix& data,
                              const std::vector<Method>& methods,
                              const std::vector<std::size_t>& bit_lengths,
                              const BenchConfig& config);

void write_report_json(const std::string& path, const BenchmarkReport& report);
void write_recall_csv(const std::string& path, const BenchmarkReport& report);

}  // namespace och

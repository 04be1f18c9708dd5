#include "och/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "och/errors.hpp"

namespace och {

namespace {

double dist_sq(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t t = 0; t < dim; ++t) {
    const double diff = a[t] - b[t];
    acc += diff * diff;
  }
  return acc;
}

bool is_relevant(const std::vector<std::uint32_t>& relevant, std::uint32_t idx) {
  return std::binary_search(relevant.begin(), relevant.end(), idx);
}

MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  const double n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double acc = 0.0;
  for (double x : xs) acc += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(acc / n);
  return s;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

GroundTruth build_groundtruth(const DataMatrix& queries, const DataMatrix& base,
                              double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ArgumentError("build_groundtruth: fraction must lie in (0, 1]");
  if (base.n == 0) throw ArgumentError("build_groundtruth: empty base");
  if (queries.d != base.d)
    throw ArgumentError("build_groundtruth: dimension mismatch");

  const auto k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(base.n)));
  GroundTruth truth;
  truth.fraction = fraction;
  truth.relevant.resize(queries.n);

#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < queries.n; ++q) {
    std::vector<std::pair<double, std::uint32_t>> dists(base.n);
    for (std::size_t b = 0; b < base.n; ++b)
      dists[b] = {dist_sq(queries.row(q), base.row(b), base.d),
                  static_cast<std::uint32_t>(b)};
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
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
  if (query_codes.r != base_codes.r)
    throw ArgumentError("hamming_rank: code lengths differ");
  if (query_index >= query_codes.n)
    throw ArgumentError("hamming_rank: query index out of range");

  const std::uint64_t* q = query_codes.row(query_index);
  std::vector<std::uint32_t> dist(base_codes.n);
  for (std::size_t b = 0; b < base_codes.n; ++b)
    dist[b] = hamming_rows(q, base_codes.row(b), base_codes.words_per_code);

  std::vector<std::uint32_t> order(base_codes.n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&dist](std::uint32_t a, std::uint32_t b) {
    return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
  });
  return order;
}

double average_precision(const std::vector<std::uint32_t>& ranking,
                         const std::vector<std::uint32_t>& relevant) {
  if (relevant.empty())
    throw ArgumentError("average_precision: empty relevant set leaves the metric undefined");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
    if (is_relevant(relevant, ranking[pos])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

namespace {

std::size_t hits_in_top_k(const std::vector<std::uint32_t>& ranking,
                          const std::vector<std::uint32_t>& relevant,
                          std::size_t k) {
  if (k < 1 || k > ranking.size())
    throw ArgumentError("top-K cutoff out of range [1, |ranking|]");
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < k; ++pos)
    if (is_relevant(relevant, ranking[pos])) ++hits;
  return hits;
}

}  // namespace

double precision_at(const std::vector<std::uint32_t>& ranking,
                    const std::vector<std::uint32_t>& relevant, std::size_t k) {
  return static_cast<double>(hits_in_top_k(ranking, relevant, k)) /
         static_cast<double>(k);
}

double recall_at(const std::vector<std::uint32_t>& ranking,
                 const std::vector<std::uint32_t>& relevant, std::size_t k) {
  if (relevant.empty())
    throw ArgumentError("recall_at: empty relevant set leaves the metric undefined");
  return static_cast<double>(hits_in_top_k(ranking, relevant, k)) /
         static_cast<double>(relevant.size());
}

std::vector<std::size_t> recall_k_grid(std::size_t base_size) {
  std::vector<std::size_t> grid;
  const std::size_t steps[3] = {1, 2, 5};
  for (std::size_t scale = 1;; scale *= 10) {
    for (std::size_t s : steps) {
      const std::size_t k = s * scale;
      if (k > base_size) {
        if (grid.empty() || grid.back() != base_size) grid.push_back(base_size);
        return grid;
      }
      grid.push_back(k);
    }
    if (scale > base_size) break;  // unreachable; guards overflow
  }
  return grid;
}

std::string method_name(Method method) {
  return method == Method::Och ? "och" : "lsh";
}

CodeMetrics evaluate_codes(const BinaryCodes& query_codes,
                           const BinaryCodes& base_codes,
                           const GroundTruth& truth) {
  if (truth.num_queries() != query_codes.n)
    throw ArgumentError("evaluate_codes: ground truth and query codes disagree");
  if (base_codes.n == 0) throw ArgumentError("evaluate_codes: empty base codes");
  if (query_codes.r != base_codes.r)
    throw ArgumentError("evaluate_codes: code lengths differ");

  const std::vector<std::size_t> grid = recall_k_grid(base_codes.n);
  const std::size_t pre_k = std::min<std::size_t>(100, base_codes.n);
  const std::size_t nq = query_codes.n;

  std::vector<double> ap(nq), pre(nq);
  std::vector<std::vector<double>> rec(grid.size(),
                                       std::vector<double>(nq, 0.0));
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < nq; ++q) {
    const auto ranking = hamming_rank(query_codes, q, base_codes);
    const auto& relevant = truth.relevant[q];
    ap[q] = average_precision(ranking, relevant);
    pre[q] = precision_at(ranking, relevant, pre_k);
    for (std::size_t g = 0; g < grid.size(); ++g)
      rec[g][q] = recall_at(ranking, relevant, grid[g]);
  }

  CodeMetrics metrics;
  metrics.map = std::accumulate(ap.begin(), ap.end(), 0.0) / static_cast<double>(nq);
  metrics.pre100 =
      std::accumulate(pre.begin(), pre.end(), 0.0) / static_cast<double>(nq);
  metrics.recall_curve.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    metrics.recall_curve.emplace_back(
        grid[g], std::accumulate(rec[g].begin(), rec[g].end(), 0.0) /
                     static_cast<double>(nq));
  return metrics;
}

BenchmarkReport run_benchmark(const DataMatrix& data,
                              const std::vector<Method>& methods,
                              const std::vector<std::size_t>& bit_lengths,
                              const BenchConfig& config) {
  if (methods.empty() || bit_lengths.empty())
    throw ArgumentError("run_benchmark: need at least one method and bit length");
  if (config.repetitions < 1)
    throw ArgumentError("run_benchmark: repetitions must be >= 1");
  if (config.n_query + 1 > data.n || config.n_train > data.n - config.n_query)
    throw ArgumentError("run_benchmark: split sizes exceed the dataset");
  if (!(config.fraction > 0.0 && config.fraction <= 1.0))
    throw ArgumentError("run_benchmark: fraction must lie in (0, 1]");
  const bool wants_och =
      std::find(methods.begin(), methods.end(), Method::Och) != methods.end();
  if (wants_och) {
    if (config.pipeline.centers > config.n_train)
      throw ArgumentError("run_benchmark: more centers than training points");
    if (config.pipeline.d_svd > data.d)
      throw ArgumentError("run_benchmark: d_svd exceeds data dimension");
    for (std::size_t bits : bit_lengths)
      if (bits < config.pipeline.d_svd)
        throw ArgumentError("run_benchmark: bit length " + std::to_string(bits) +
                            " is below d_svd");
  }

  struct CellAccum {
    std::vector<double> map, pre100, train_s, encode_s;
    std::vector<std::vector<double>> recall;  // per grid K, per rep
    std::vector<std::size_t> grid;
  };
  std::vector<CellAccum> accum(methods.size() * bit_lengths.size());

  BenchmarkReport report;
  report.repetitions = config.repetitions;
  report.n_query = config.n_query;
  report.n_train = config.n_train;
  report.n_base = data.n - config.n_query;
  report.fraction = config.fraction;

  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = config.seed + rep;
    report.seeds.push_back(rep_seed);

    DataSplit s = split(data, config.n_query, config.n_train, rep_seed);
    GroundTruth truth = build_groundtruth(s.queries, s.base, config.fraction);

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      for (std::size_t bi = 0; bi < bit_lengths.size(); ++bi) {
        const std::size_t bits = bit_lengths[bi];
        CellAccum& cell = accum[mi * bit_lengths.size() + bi];

        const double t_train0 = now_seconds();
        HashModel model;
        if (methods[mi] == Method::Och) {
          PipelineConfig pc = config.pipeline;
          pc.train.seed = rep_seed;
          model = train_och_model(s.train, bits, pc);
        } else {
          model = build_lsh_model(data.d, bits, rep_seed);
        }
        const double t_train1 = now_seconds();

        BinaryCodes base_codes = encode(model, s.base);
        BinaryCodes query_codes = encode(model, s.queries);
        const double t_encode1 = now_seconds();

        CodeMetrics metrics = evaluate_codes(query_codes, base_codes, truth);
        cell.map.push_back(metrics.map);
        cell.pre100.push_back(metrics.pre100);
        cell.train_s.push_back(t_train1 - t_train0);
        cell.encode_s.push_back(t_encode1 - t_train1);
        if (cell.grid.empty()) {
          for (const auto& [k, v] : metrics.recall_curve) cell.grid.push_back(k);
          cell.recall.assign(cell.grid.size(), {});
        }
        for (std::size_t g = 0; g < cell.grid.size(); ++g)
          cell.recall[g].push_back(metrics.recall_curve[g].second);
      }
    }
  }

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t bi = 0; bi < bit_lengths.size(); ++bi) {
      const CellAccum& cell = accum[mi * bit_lengths.size() + bi];
      ReportCell out;
      out.method = methods[mi];
      out.bits = bit_lengths[bi];
      out.map = stats_of(cell.map);
      out.pre100 = stats_of(cell.pre100);
      out.train_seconds = stats_of(cell.train_s);
      out.encode_seconds = stats_of(cell.encode_s);
      for (std::size_t g = 0; g < cell.grid.size(); ++g)
        out.recall_curve.emplace_back(cell.grid[g], stats_of(cell.recall[g]));
      report.cells.push_back(std::move(out));
    }
  }
  return report;
}

void write_report_json(const std::string& path, const BenchmarkReport& report) {
  nlohmann::json doc;
  doc["protocol"] = {{"n_query", report.n_query},
                     {"n_base", report.n_base},
                     {"n_train", report.n_train},
                     {"fraction", report.fraction},
                     {"repetitions", report.repetitions},
                     {"seeds", report.seeds}};
  nlohmann::json results = nlohmann::json::object();
  for (const auto& cell : report.cells) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [k, stats] : cell.recall_curve)
      curve.push_back({{"k", k}, {"v", stats.mean}, {"v_std", stats.stddev}});
    results[method_name(cell.method)][std::to_string(cell.bits)] = {
        {"map", cell.map.mean},
        {"map_std", cell.map.stddev},
        {"pre100", cell.pre100.mean},
        {"pre100_std", cell.pre100.stddev},
        {"train_s", cell.train_seconds.mean},
        {"train_s_std", cell.train_seconds.stddev},
        {"encode_s", cell.encode_seconds.mean},
        {"encode_s_std", cell.encode_seconds.stddev},
        {"recall_curve", curve}};
  }
  doc["results"] = results;

  std::ofstream file(path);
  if (!file) throw FormatError("write_report_json: cannot open " + path);
  file << doc.dump(2) << "\n";
  if (!file) throw FormatError("write_report_json: write failed for " + path);
}

void write_recall_csv(const std::string& path, const BenchmarkReport& report) {
  std::ofstream file(path);
  if (!file) throw FormatError("write_recall_csv: cannot open " + path);
  file << "method,bits,k,recall\n";
  file.precision(17);
  for (const auto& cell : report.cells)
    for (const auto& [k, stats] : cell.recall_curve)
      file << method_name(cell.method) << ',' << cell.bits << ',' << k << ','
           << stats.mean << "\n";
  if (!file) throw FormatError("write_recall_csv: write failed for " + path);
}

}  // namespace och

#include "och/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "och/errors.hpp"
#include "och/rng.hpp"

namespace och {

namespace {

void check_finite(const DataMatrix& m, const char* what) {
  for (double v : m.values) {
    if (!std::isfinite(v)) {
      throw FormatError(std::string(what) + ": non-finite component");
    }
  }
}

}  // namespace

DataMatrix load_fvecs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open fvecs file: " + path);

  DataMatrix out;
  std::vector<float> record;
  while (true) {
    std::int32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    if (in.gcount() == 0 && in.eof()) break;  // clean end of file
    if (in.gcount() != sizeof(dim)) {
      throw FormatError("fvecs: truncated dimension field in " + path);
    }
    if (dim <= 0) {
      throw FormatError("fvecs: non-positive dimension " +
                        std::to_string(dim) + " in " + path);
    }
    if (out.n == 0) {
      out.d = static_cast<std::size_t>(dim);
    } else if (static_cast<std::size_t>(dim) != out.d) {
      throw FormatError("fvecs: record " + std::to_string(out.n) +
                        " declares dimension " + std::to_string(dim) +
                        " after " + std::to_string(out.d) + " in " + path);
    }
    record.resize(out.d);
    in.read(reinterpret_cast<char*>(record.data()),
            static_cast<std::streamsize>(out.d * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(out.d * sizeof(float))) {
      throw FormatError("fvecs: truncated record " + std::to_string(out.n) +
                        " in " + path);
    }
    out.values.insert(out.values.end(), record.begin(), record.end());
    ++out.n;
  }
  check_finite(out, "fvecs");
  return out;
}

void write_fvecs(const std::string& path, const DataMatrix& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open fvecs file for write: " + path);
  std::vector<float> record(data.d);
  const auto dim = static_cast<std::int32_t>(data.d);
  for (std::size_t i = 0; i < data.n; ++i) {
    const double* src = data.row(i);
    for (std::size_t k = 0; k < data.d; ++k) {
      record[k] = static_cast<float>(src[k]);
    }
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(record.data()),
              static_cast<std::streamsize>(data.d * sizeof(float)));
  }
  if (!out) throw FormatError("short write to " + path);
}

DataMatrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open csv file: " + path);

  DataMatrix out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<double> fields;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw FormatError("csv: bad float on line " + std::to_string(line_no) +
                          " of " + path);
      }
      fields.push_back(v);
      if (next == end) break;
      if (*next != ',') {
        throw FormatError("csv: expected ',' on line " +
                          std::to_string(line_no) + " of " + path);
      }
      p = next + 1;
      if (p == end) {
        throw FormatError("csv: trailing ',' on line " +
                          std::to_string(line_no) + " of " + path);
      }
    }
    if (out.n == 0) {
      out.d = fields.size();
    } else if (fields.size() != out.d) {
      throw FormatError("csv: line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(out.d));
    }
    out.values.insert(out.values.end(), fields.begin(), fields.end());
    ++out.n;
  }
  check_finite(out, "csv");
  return out;
}

DataMatrix preprocess(const DataMatrix& data) {
  if (data.n < 1) throw ArgumentError("preprocess: empty dataset");

  DataMatrix out = data;
  out.preprocessed = false;

  // Alternate centering and normalization until the column means vanish.
  // The final operation of every sweep is a normalize, so unit norms hold
  // exactly at exit.
  constexpr double kMeanTol = 1e-10;
  constexpr std::size_t kMaxSweeps = 1000;
  std::vector<double> mean(out.d);
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t i = 0; i < out.n; ++i) {
      const double* r = out.row(i);
      for (std::size_t k = 0; k < out.d; ++k) mean[k] += r[k];
    }
    for (std::size_t k = 0; k < out.d; ++k) mean[k] /= static_cast<double>(out.n);

    for (std::size_t i = 0; i < out.n; ++i) {
      double* r = out.row(i);
      double norm_sq = 0.0;
      for (std::size_t k = 0; k < out.d; ++k) {
        r[k] -= mean[k];
        norm_sq += r[k] * r[k];
      }
      if (norm_sq == 0.0) {
        throw NumericError("preprocess: vector " + std::to_string(i) +
                           " is zero after centering");
      }
      double inv = 1.0 / std::sqrt(norm_sq);
      for (std::size_t k = 0; k < out.d; ++k) r[k] *= inv;
    }

    // Converged when the means of the freshly normalized data vanish.
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t i = 0; i < out.n; ++i) {
      const double* r = out.row(i);
      for (std::size_t k = 0; k < out.d; ++k) mean[k] += r[k];
    }
    double max_mean = 0.0;
    for (std::size_t k = 0; k < out.d; ++k) {
      max_mean = std::max(max_mean,
                          std::abs(mean[k]) / static_cast<double>(out.n));
    }
    if (max_mean < kMeanTol) {
      out.preprocessed = true;
      return out;
    }
  }
  throw NumericError("preprocess: centering/normalization did not converge");
}

DataMatrix gen_synthetic(std::size_t num_clusters, std::size_t n,
                         std::size_t d, double spread, std::uint64_t seed,
                         std::vector<double>* cluster_means) {
  if (num_clusters < 1 || d < 1 || n < num_clusters) {
    throw ArgumentError("gen_synthetic: need num_clusters >= 1, d >= 1, "
                        "n >= num_clusters");
  }
  if (spread < 0.0) throw ArgumentError("gen_synthetic: negative spread");

  Rng rng(seed);
  std::vector<double> means(num_clusters * d);
  for (double& m : means) m = rng.uniform(-1.0, 1.0);

  DataMatrix out;
  out.n = n;
  out.d = d;
  out.values.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = i % num_clusters;
    double* r = out.row(i);
    const double* m = means.data() + c * d;
    for (std::size_t k = 0; k < d; ++k) {
      r[k] = m[k] + spread * rng.gaussian();
    }
  }
  if (cluster_means) *cluster_means = std::move(means);
  return out;
}

DataSplit split(const DataMatrix& data, std::size_t n_query,
                std::size_t n_train, std::uint64_t seed) {
  if (n_query + 1 > data.n) {
    throw ArgumentError("split: n_query leaves no base points");
  }
  if (n_train > data.n - n_query) {
    throw ArgumentError("split: n_train exceeds base size");
  }

  Rng rng(seed);
  std::vector<std::uint32_t> perm(data.n);
  std::iota(perm.begin(), perm.end(), 0u);
  rng.shuffle(perm);

  DataSplit out;
  out.seed = seed;
  out.query_indices.assign(perm.begin(), perm.begin() + n_query);
  out.base_indices.assign(perm.begin() + n_query, perm.end());
  std::sort(out.query_indices.begin(), out.query_indices.end());
  std::sort(out.base_indices.begin(), out.base_indices.end());

  std::vector<std::uint32_t> base_perm = out.base_indices;
  rng.shuffle(base_perm);
  out.train_indices.assign(base_perm.begin(), base_perm.begin() + n_train);
  std::sort(out.train_indices.begin(), out.train_indices.end());

  auto gather = [&](const std::vector<std::uint32_t>& idx) {
    DataMatrix m;
    m.n = idx.size();
    m.d = data.d;
    m.preprocessed = data.preprocessed;
    m.values.resize(m.n * m.d);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::memcpy(m.row(i), data.row(idx[i]), data.d * sizeof(double));
    }
    return m;
  };
  out.queries = gather(out.query_indices);
  out.base = gather(out.base_indices);
  out.train = gather(out.train_indices);
  return out;
}

}  // namespace och

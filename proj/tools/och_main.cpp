// Command-line front end: synth / train / encode / eval / bench.
// Exit codes: 0 success, 2 argument or config error, 3 data-format error,
// 4 numeric failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "och/dataset.hpp"
#include "och/encoder.hpp"
#include "och/errors.hpp"
#include "och/evaluation.hpp"
#include "och/pipeline.hpp"

namespace {

using nlohmann::json;

// Keys a config file may carry; anything else is a typo worth rejecting.
const std::vector<std::string> kConfigKeys = {
    "data",       "clusters",    "n",           "d",     "spread",
    "n_query",    "n_train",     "fraction",    "centers", "d_svd",
    "bits",       "eta",         "max_iters",   "batch_size", "tol",
    "kmeans_iters", "repetitions", "seed",      "out",   "methods"};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream file(path);
  if (!file) throw och::ArgumentError("config file not found: " + path);
  json cfg;
  try {
    file >> cfg;
  } catch (const json::exception& e) {
    throw och::ArgumentError("config file " + path + " is not valid JSON: " +
                             e.what());
  }
  if (!cfg.is_object())
    throw och::ArgumentError("config file " + path + " must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) ==
        kConfigKeys.end())
      throw och::ArgumentError("config file " + path + ": unknown key \"" + key +
                               "\"");
  }
  return cfg;
}

// CLI flags win over config values; config values win over built-in defaults.
template <typename T>
void merge(const CLI::Option* opt, const json& cfg, const char* key, T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw och::ArgumentError(std::string("config key \"") + key +
                             "\" has the wrong type");
  }
}

void merge_bits(const CLI::Option* opt, const json& cfg,
                std::vector<std::size_t>& bits) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains("bits")) return;
  const auto& v = cfg.at("bits");
  try {
    if (v.is_array())
      bits = v.get<std::vector<std::size_t>>();
    else
      bits = {v.get<std::size_t>()};
  } catch (const json::exception&) {
    throw och::ArgumentError("config key \"bits\" must be an integer or array");
  }
}

och::DataMatrix load_data(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return och::load_csv(path);
  return och::load_fvecs(path);
}

och::DataMatrix load_preprocessed(const std::string& path) {
  return och::preprocess(load_data(path));
}

std::vector<och::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<och::Method> methods;
  for (const auto& name : names) {
    if (name == "och")
      methods.push_back(och::Method::Och);
    else if (name == "lsh")
      methods.push_back(och::Method::Lsh);
    else
      throw och::ArgumentError("unknown method \"" + name +
                               "\" (expected och or lsh)");
  }
  return methods;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinal-constraint hashing: train binary hash functions and "
               "benchmark Hamming-ranking retrieval"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file; command-line flags override its values");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a Gaussian-cluster dataset");
  std::size_t sy_clusters = 10, sy_n = 1000, sy_d = 16;
  double sy_spread = 1.0;
  std::uint64_t sy_seed = 0;
  std::string sy_out = "synth.fvecs";
  auto* o_sy_clusters = synth->add_option("--clusters", sy_clusters, "cluster count");
  auto* o_sy_n = synth->add_option("--n", sy_n, "point count");
  auto* o_sy_d = synth->add_option("--d", sy_d, "dimension");
  auto* o_sy_spread = synth->add_option("--spread", sy_spread, "within-cluster stddev");
  auto* o_sy_seed = synth->add_option("--seed", sy_seed, "random seed");
  auto* o_sy_out = synth->add_option("-o,--out", sy_out, "output fvecs path");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train a hash model");
  std::string tr_data, tr_out = "model.bin", tr_trace;
  std::size_t tr_bits = 32, tr_centers = 300, tr_dsvd = 16, tr_iters = 500,
              tr_batch = 2000, tr_kmeans_iters = 100;
  double tr_eta = 0.01, tr_tol = 1e-4;
  std::uint64_t tr_seed = 0;
  auto* o_tr_data = train_cmd->add_option("--data", tr_data, "dataset (.fvecs or .csv)");
  auto* o_tr_bits = train_cmd->add_option("--bits", tr_bits, "code length r");
  auto* o_tr_centers = train_cmd->add_option("--centers", tr_centers, "anchor count L");
  auto* o_tr_dsvd = train_cmd->add_option("--dsvd", tr_dsvd, "projection dimension");
  auto* o_tr_eta = train_cmd->add_option("--eta", tr_eta, "learning rate");
  auto* o_tr_iters = train_cmd->add_option("--iters", tr_iters, "max iterations");
  auto* o_tr_batch = train_cmd->add_option("--batch", tr_batch, "triplets per iteration");
  auto* o_tr_tol = train_cmd->add_option("--tol", tr_tol, "early-stop tolerance (0 disables)");
  auto* o_tr_kmeans = train_cmd->add_option("--kmeans-iters", tr_kmeans_iters, "k-means iteration cap");
  auto* o_tr_seed = train_cmd->add_option("--seed", tr_seed, "random seed");
  auto* o_tr_out = train_cmd->add_option("--out", tr_out, "model output path");
  train_cmd->add_option("--trace", tr_trace, "trace CSV path (default: <out>.trace.csv)");

  // ---- encode ----
  auto* encode_cmd = app.add_subcommand("encode", "Encode a dataset with a model");
  std::string en_model, en_data, en_out = "codes.bin";
  encode_cmd->add_option("--model", en_model, "model file")->required();
  auto* o_en_data = encode_cmd->add_option("--data", en_data, "dataset (.fvecs or .csv)");
  auto* o_en_out = encode_cmd->add_option("--out", en_out, "codes output path");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand(
      "eval", "Score retrieval quality of a model or pre-built codes");
  std::string ev_model, ev_codes, ev_data, ev_out = "report.json";
  std::size_t ev_queries = 0;
  double ev_fraction = 0.02;
  std::uint64_t ev_seed = 0;
  eval_cmd->add_option("--model", ev_model, "model file");
  eval_cmd->add_option("--codes", ev_codes, "codes file (alternative to --model)");
  auto* o_ev_data = eval_cmd->add_option("--data", ev_data, "dataset (.fvecs or .csv)");
  auto* o_ev_queries = eval_cmd->add_option(
      "--queries", ev_queries, "query count (0: every point queries the whole set)");
  auto* o_ev_fraction = eval_cmd->add_option("--fraction", ev_fraction,
                                             "ground-truth fraction");
  auto* o_ev_seed = eval_cmd->add_option("--seed", ev_seed, "split seed");
  auto* o_ev_out = eval_cmd->add_option("--out", ev_out, "report JSON path");

  // ---- bench ----
  auto* bench_cmd = app.add_subcommand(
      "bench", "Full protocol: repeated split/train/encode/score");
  std::string be_data, be_out = "bench_out";
  std::vector<std::string> be_methods = {"och", "lsh"};
  std::vector<std::size_t> be_bits = {32};
  std::size_t be_queries = 2000, be_train = 10000, be_centers = 300,
              be_dsvd = 16, be_iters = 500, be_batch = 2000,
              be_kmeans_iters = 100, be_reps = 10;
  std::size_t be_clusters = 10, be_n = 0, be_d = 16;
  double be_fraction = 0.02, be_eta = 0.01, be_tol = 1e-4, be_spread = 1.0;
  std::uint64_t be_seed = 0;
  auto* o_be_data = bench_cmd->add_option("--data", be_data, "dataset (.fvecs or .csv)");
  auto* o_be_clusters = bench_cmd->add_option("--clusters", be_clusters,
                                              "synthetic cluster count (no --data)");
  auto* o_be_n = bench_cmd->add_option("--n", be_n, "synthetic point count (no --data)");
  auto* o_be_d = bench_cmd->add_option("--d", be_d, "synthetic dimension (no --data)");
  auto* o_be_spread = bench_cmd->add_option("--spread", be_spread, "synthetic spread");
  auto* o_be_methods =
      bench_cmd->add_option("--methods", be_methods, "och,lsh")->delimiter(',');
  auto* o_be_bits =
      bench_cmd->add_option("--bits", be_bits, "code lengths")->delimiter(',');
  auto* o_be_queries = bench_cmd->add_option("--queries", be_queries, "query count");
  auto* o_be_train = bench_cmd->add_option("--train-size", be_train, "training subset size");
  auto* o_be_fraction = bench_cmd->add_option("--fraction", be_fraction,
                                              "ground-truth fraction");
  auto* o_be_reps = bench_cmd->add_option("--reps", be_reps, "repetitions");
  auto* o_be_centers = bench_cmd->add_option("--centers", be_centers, "anchor count L");
  auto* o_be_dsvd = bench_cmd->add_option("--dsvd", be_dsvd, "projection dimension");
  auto* o_be_eta = bench_cmd->add_option("--eta", be_eta, "learning rate");
  auto* o_be_iters = bench_cmd->add_option("--iters", be_iters, "max iterations");
  auto* o_be_batch = bench_cmd->add_option("--batch", be_batch, "triplets per iteration");
  auto* o_be_tol = bench_cmd->add_option("--tol", be_tol, "early-stop tolerance");
  auto* o_be_kmeans = bench_cmd->add_option("--kmeans-iters", be_kmeans_iters,
                                            "k-means iteration cap");
  auto* o_be_seed = bench_cmd->add_option("--seed", be_seed, "base seed");
  auto* o_be_out = bench_cmd->add_option("--out", be_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const json cfg = load_config(config_path);

    if (synth->parsed()) {
      merge(o_sy_clusters, cfg, "clusters", sy_clusters);
      merge(o_sy_n, cfg, "n", sy_n);
      merge(o_sy_d, cfg, "d", sy_d);
      merge(o_sy_spread, cfg, "spread", sy_spread);
      merge(o_sy_seed, cfg, "seed", sy_seed);
      merge(o_sy_out, cfg, "out", sy_out);
      och::DataMatrix data =
          och::gen_synthetic(sy_clusters, sy_n, sy_d, sy_spread, sy_seed);
      och::write_fvecs(sy_out, data);
      std::cout << "wrote " << data.n << " x " << data.d << " points to "
                << sy_out << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      merge(o_tr_data, cfg, "data", tr_data);
      merge(o_tr_bits, cfg, "bits", tr_bits);
      merge(o_tr_centers, cfg, "centers", tr_centers);
      merge(o_tr_dsvd, cfg, "d_svd", tr_dsvd);
      merge(o_tr_eta, cfg, "eta", tr_eta);
      merge(o_tr_iters, cfg, "max_iters", tr_iters);
      merge(o_tr_batch, cfg, "batch_size", tr_batch);
      merge(o_tr_tol, cfg, "tol", tr_tol);
      merge(o_tr_kmeans, cfg, "kmeans_iters", tr_kmeans_iters);
      merge(o_tr_seed, cfg, "seed", tr_seed);
      merge(o_tr_out, cfg, "out", tr_out);
      if (tr_data.empty())
        throw och::ArgumentError("train: --data (or config \"data\") is required");

      och::DataMatrix data = load_preprocessed(tr_data);
      och::PipelineConfig pc;
      pc.centers = tr_centers;
      pc.kmeans_iters = tr_kmeans_iters;
      pc.d_svd = tr_dsvd;
      pc.train.eta = tr_eta;
      pc.train.max_iters = tr_iters;
      pc.train.batch_size = tr_batch;
      pc.train.tol = tr_tol;
      pc.train.seed = tr_seed;

      och::PipelineArtifacts artifacts;
      och::HashModel model = och::train_och_model(data, tr_bits, pc, &artifacts);
      och::save_model(tr_out, model);
      const std::string trace_path =
          tr_trace.empty() ? tr_out + ".trace.csv" : tr_trace;
      och::write_trace(trace_path, artifacts.trace);
      std::cout << "trained " << tr_bits << "-bit model on " << data.n
                << " points (" << artifacts.triplets.triplets.size()
                << " triplets, " << artifacts.trace.iterations_run
                << " iterations); model -> " << tr_out << ", trace -> "
                << trace_path << "\n";
      return 0;
    }

    if (encode_cmd->parsed()) {
      merge(o_en_data, cfg, "data", en_data);
      merge(o_en_out, cfg, "out", en_out);
      if (en_data.empty())
        throw och::ArgumentError("encode: --data (or config \"data\") is required");
      och::HashModel model = och::load_model(en_model);
      och::DataMatrix data = load_preprocessed(en_data);
      och::BinaryCodes codes = och::encode(model, data);
      och::write_codes(en_out, codes);
      std::cout << "encoded " << codes.n << " points at " << codes.r
                << " bits -> " << en_out << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      merge(o_ev_data, cfg, "data", ev_data);
      merge(o_ev_queries, cfg, "n_query", ev_queries);
      merge(o_ev_fraction, cfg, "fraction", ev_fraction);
      merge(o_ev_seed, cfg, "seed", ev_seed);
      merge(o_ev_out, cfg, "out", ev_out);
      if (ev_data.empty())
        throw och::ArgumentError("eval: --data (or config \"data\") is required");
      if (ev_model.empty() == ev_codes.empty())
        throw och::ArgumentError("eval: pass exactly one of --model or --codes");

      och::DataMatrix data = load_preprocessed(ev_data);
      och::BinaryCodes all_codes;
      if (!ev_model.empty()) {
        och::HashModel model = och::load_model(ev_model);
        all_codes = och::encode(model, data);
      } else {
        all_codes = och::load_codes(ev_codes);
        if (all_codes.n != data.n)
          throw och::ArgumentError("eval: codes row count does not match dataset");
      }

      och::GroundTruth truth;
      och::CodeMetrics metrics;
      std::size_t n_base = 0;
      if (ev_queries == 0) {
        truth = och::build_groundtruth(data, data, ev_fraction);
        metrics = och::evaluate_codes(all_codes, all_codes, truth);
        n_base = data.n;
      } else {
        och::DataSplit s = och::split(data, ev_queries, 0, ev_seed);
        const auto gather = [&all_codes](const std::vector<std::uint32_t>& idx) {
          och::BinaryCodes out;
          out.n = idx.size();
          out.r = all_codes.r;
          out.words_per_code = all_codes.words_per_code;
          out.words.resize(out.n * out.words_per_code);
          for (std::size_t i = 0; i < idx.size(); ++i)
            std::copy_n(all_codes.row(idx[i]), out.words_per_code,
                        out.words.data() + i * out.words_per_code);
          return out;
        };
        och::BinaryCodes query_codes = gather(s.query_indices);
        och::BinaryCodes base_codes = gather(s.base_indices);
        truth = och::build_groundtruth(s.queries, s.base, ev_fraction);
        metrics = och::evaluate_codes(query_codes, base_codes, truth);
        n_base = s.base.n;
      }

      json report = {{"n_query", truth.num_queries()},
                     {"n_base", n_base},
                     {"fraction", ev_fraction},
                     {"map", metrics.map},
                     {"pre100", metrics.pre100}};
      json curve = json::array();
      for (const auto& [k, v] : metrics.recall_curve)
        curve.push_back({{"k", k}, {"v", v}});
      report["recall_curve"] = curve;
      std::ofstream out(ev_out);
      if (!out) throw och::FormatError("eval: cannot open " + ev_out);
      out << report.dump(2) << "\n";
      std::cout << "mAP " << metrics.map << ", precision@100 " << metrics.pre100
                << " -> " << ev_out << "\n";
      return 0;
    }

    // bench
    merge(o_be_data, cfg, "data", be_data);
    merge(o_be_clusters, cfg, "clusters", be_clusters);
    merge(o_be_n, cfg, "n", be_n);
    merge(o_be_d, cfg, "d", be_d);
    merge(o_be_spread, cfg, "spread", be_spread);
    merge(o_be_methods, cfg, "methods", be_methods);
    merge_bits(o_be_bits, cfg, be_bits);
    merge(o_be_queries, cfg, "n_query", be_queries);
    merge(o_be_train, cfg, "n_train", be_train);
    merge(o_be_fraction, cfg, "fraction", be_fraction);
    merge(o_be_reps, cfg, "repetitions", be_reps);
    merge(o_be_centers, cfg, "centers", be_centers);
    merge(o_be_dsvd, cfg, "d_svd", be_dsvd);
    merge(o_be_eta, cfg, "eta", be_eta);
    merge(o_be_iters, cfg, "max_iters", be_iters);
    merge(o_be_batch, cfg, "batch_size", be_batch);
    merge(o_be_tol, cfg, "tol", be_tol);
    merge(o_be_kmeans, cfg, "kmeans_iters", be_kmeans_iters);
    merge(o_be_seed, cfg, "seed", be_seed);
    merge(o_be_out, cfg, "out", be_out);

    och::DataMatrix data;
    if (!be_data.empty()) {
      data = load_preprocessed(be_data);
    } else if (be_n > 0) {
      data = och::preprocess(
          och::gen_synthetic(be_clusters, be_n, be_d, be_spread, be_seed));
    } else {
      throw och::ArgumentError(
          "bench: pass --data, or --n with --clusters/--d for synthetic data");
    }

    och::BenchConfig bc;
    bc.n_query = be_queries;
    bc.n_train = be_train;
    bc.fraction = be_fraction;
    bc.repetitions = be_reps;
    bc.seed = be_seed;
    bc.pipeline.centers = be_centers;
    bc.pipeline.kmeans_iters = be_kmeans_iters;
    bc.pipeline.d_svd = be_dsvd;
    bc.pipeline.train.eta = be_eta;
    bc.pipeline.train.max_iters = be_iters;
    bc.pipeline.train.batch_size = be_batch;
    bc.pipeline.train.tol = be_tol;

    och::BenchmarkReport report =
        och::run_benchmark(data, parse_methods(be_methods), be_bits, bc);

    std::filesystem::create_directories(be_out);
    const std::string report_path = be_out + "/report.json";
    const std::string csv_path = be_out + "/recall.csv";
    och::write_report_json(report_path, report);
    och::write_recall_csv(csv_path, report);
    for (const auto& cell : report.cells)
      std::cout << och::method_name(cell.method) << " " << cell.bits
                << "-bit: mAP " << cell.map.mean << " (std " << cell.map.stddev
                << "), precision@100 " << cell.pre100.mean << "\n";
    std::cout << "report -> " << report_path << ", curves -> " << csv_path
              << "\n";
    return 0;
  } catch (const och::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const och::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const och::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

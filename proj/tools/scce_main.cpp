#include "scce/embedding.hpp"
#include "scce/estimator.hpp"
#include "scce/experiments.hpp"
#include "scce/generator.hpp"
#include "scce/io.hpp"
#include "scce/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scce;

std::string num(double v) { return io::format_number(v); }

void report_written(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

std::vector<double> parse_scales(const std::string& key,
                                 const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream stream(value);
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      const std::string trimmed = [&] {
        std::size_t b = item.find_first_not_of(" \t");
        std::size_t e = item.find_last_not_of(" \t");
        return b == std::string::npos ? std::string()
                                      : item.substr(b, e - b + 1);
      }();
      out.push_back(std::stod(trimmed, &used));
      if (used != trimmed.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("config: key '" + key +
                                  "': not a number list: '" + value + "'");
    }
  }
  if (out.size() != 3) {
    throw std::invalid_argument("config: key '" + key +
                                "': expected three comma-separated values");
  }
  return out;
}

/// Parameters of the `generate` verb, optionally loaded from the [model]
/// section of a config file and overridable from the command line.
struct GenerateParams {
  std::string model = "sbm";
  int n = 300;
  int L = 50;
  double rho = 0.2;
  Eigen::Vector3d scales_a = benchmark_scales_a();
  Eigen::Vector3d scales_b = benchmark_scales_b();
  std::optional<double> beta;

  void load(const ConfigMap& map) {
    auto get = [&](const std::string& key) -> const std::string* {
      if (auto it = map.find("model." + key); it != map.end()) {
        return &it->second;
      }
      return nullptr;
    };
    if (const auto* v = get("model")) model = *v;
    if (const auto* v = get("n")) n = std::stoi(*v);
    if (const auto* v = get("L")) L = std::stoi(*v);
    if (const auto* v = get("rho")) rho = std::stod(*v);
    if (const auto* v = get("scales_a")) {
      const auto s = parse_scales("model.scales_a", *v);
      scales_a = Eigen::Vector3d(s[0], s[1], s[2]);
    }
    if (const auto* v = get("scales_b")) {
      const auto s = parse_scales("model.scales_b", *v);
      scales_b = Eigen::Vector3d(s[0], s[1], s[2]);
    }
    if (const auto* v = get("beta")) beta = std::stod(*v);
  }
};

std::vector<std::string> sequential_ids(int count) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) ids.push_back(std::to_string(i));
  return ids;
}

json upper_triangle(const Matrix& m) {
  json upper = json::array();
  for (int s = 0; s < m.rows(); ++s) {
    for (int t = s; t < m.cols(); ++t) upper.push_back(m(s, t));
  }
  return upper;
}

int run_generate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_dir) {
  GenerateParams params;
  if (!config_path.empty()) params.load(parse_config_file(config_path));
  if (params.model != "sbm" && params.model != "dcsbm") {
    throw std::invalid_argument("config: model must be sbm or dcsbm, got '" +
                                params.model + "'");
  }
  std::optional<double> norm = params.beta;
  if (params.model == "dcsbm" && !norm) {
    norm = benchmark_propensity_norm(params.n);
  }
  if (params.model == "sbm") norm.reset();

  const BlockModelSpec spec =
      benchmark_spec(params.n, params.L, params.rho, params.scales_a,
                     params.scales_b, norm, seed);
  const MultiLayerNetwork net = sample_network(spec, seed);
  const PopulationDecomposition pop = population_decomposition(spec);

  fs::create_directories(out_dir);
  std::vector<std::string> files;

  const fs::path edges = fs::path(out_dir) / "edges.csv";
  export_edge_list(edges, net, sequential_ids(params.n),
                   sequential_ids(params.L));
  files.push_back(edges.string());

  std::vector<std::vector<std::string>> member_rows;
  for (int i = 0; i < params.n; ++i) {
    member_rows.push_back(
        {std::to_string(i + 1), std::to_string(spec.membership[i] + 1)});
  }
  const fs::path membership = fs::path(out_dir) / "membership.csv";
  io::write_csv(membership, {"node", "community"}, member_rows);
  files.push_back(membership.string());

  json truth;
  truth["model"] = params.model;
  truth["n"] = params.n;
  truth["L"] = params.L;
  truth["rho"] = params.rho;
  truth["seed"] = seed;
  truth["scales_a"] = {params.scales_a(0), params.scales_a(1),
                       params.scales_a(2)};
  truth["scales_b"] = {params.scales_b(0), params.scales_b(1),
                       params.scales_b(2)};
  if (norm) {
    truth["beta"] = *norm;
    json psi = json::array();
    for (int i = 0; i < params.n; ++i) psi.push_back(spec.degree_propensity(i));
    truth["psi"] = psi;
  }
  json layer_scores = json::array();
  for (int l = 0; l < params.L; ++l) {
    json entry;
    entry["layer"] = l + 1;
    entry["score_upper_row_major"] =
        upper_triangle(pop.scores[static_cast<std::size_t>(l)]);
    layer_scores.push_back(entry);
  }
  truth["scores"] = layer_scores;
  const fs::path truth_path = fs::path(out_dir) / "truth.json";
  io::write_text_file(truth_path, truth.dump(2) + "\n");
  files.push_back(truth_path.string());

  report_written(files);
  return 0;
}

json ingest_report_json(const IngestResult& result) {
  json report;
  report["records"] = result.report.records;
  report["self_loops_ignored"] = result.report.self_loops_ignored;
  report["merged_records"] = result.report.merged_records;
  report["nodes_before_filter"] = result.report.nodes_before_filter;
  report["nodes_after_filter"] = result.report.nodes_after_filter;
  report["dropped_nodes"] = result.report.dropped_nodes;
  report["layer_density"] = result.report.layer_density;
  report["warnings"] = result.report.warnings;
  report["layers"] = result.layer_ids;
  return report;
}

int run_estimate(const std::string& in_path, int K, const std::string& method,
                 double threshold, int min_total_degree,
                 const std::string& out_dir, int max_index) {
  IngestOptions opt;
  opt.threshold = threshold;
  opt.min_total_degree = min_total_degree;
  const IngestResult ingested = ingest_edge_list(in_path, opt);
  const MultiLayerNetwork& net = ingested.network;
  const int L = net.layer_count();

  const EigenspaceEstimate emb =
      method == "mase" ? mase_eigenspace(net, K)
                       : leading_eigenspace(aggregate_bias_adjusted(net), K);
  const ScoreEstimate scores = estimate_scores(net, emb);

  fs::create_directories(out_dir);
  std::vector<std::string> files;

  const fs::path report_path = fs::path(out_dir) / "ingest_report.json";
  io::write_text_file(report_path, ingest_report_json(ingested).dump(2) + "\n");
  files.push_back(report_path.string());

  const Vector scree = scree_values(aggregate_squares(net), net.node_count);
  const int count = std::min<int>(max_index, static_cast<int>(scree.size()));
  std::vector<std::vector<std::string>> scree_rows;
  for (int i = 0; i < count; ++i) {
    scree_rows.push_back({std::to_string(i + 1), num(scree(i))});
  }
  const fs::path scree_csv = fs::path(out_dir) / "scree.csv";
  io::write_csv(scree_csv, {"index", "eigenvalue"}, scree_rows);
  files.push_back(scree_csv.string());

  std::vector<std::vector<std::string>> value_rows;
  for (int i = 0; i < emb.eigenvalues.size(); ++i) {
    value_rows.push_back({std::to_string(i + 1), num(emb.eigenvalues(i))});
  }
  const fs::path values_csv = fs::path(out_dir) / "eigenvalues.csv";
  io::write_csv(values_csv, {"index", "eigenvalue"}, value_rows);
  files.push_back(values_csv.string());

  std::vector<std::string> basis_header{"node"};
  for (int k = 1; k <= K; ++k) basis_header.push_back("u" + std::to_string(k));
  std::vector<std::vector<std::string>> basis_rows;
  for (int i = 0; i < net.node_count; ++i) {
    std::vector<std::string> row{ingested.node_ids[static_cast<std::size_t>(i)]};
    for (int k = 0; k < K; ++k) row.push_back(num(emb.basis(i, k)));
    basis_rows.push_back(row);
  }
  const fs::path basis_csv = fs::path(out_dir) / "basis.csv";
  io::write_csv(basis_csv, basis_header, basis_rows);
  files.push_back(basis_csv.string());

  json scores_json = json::array();
  for (int l = 0; l < L; ++l) {
    json entry;
    entry["layer"] = ingested.layer_ids[static_cast<std::size_t>(l)];
    entry["score_upper_row_major"] =
        upper_triangle(scores.scores[static_cast<std::size_t>(l)]);
    entry["covariance_upper_row_major"] =
        upper_triangle(estimate_covariance(emb, scores, l).matrix);
    scores_json.push_back(entry);
  }
  const fs::path scores_path = fs::path(out_dir) / "scores.json";
  io::write_text_file(scores_path, scores_json.dump(2) + "\n");
  files.push_back(scores_path.string());

  report_written(files);
  return 0;
}

int run_ingest(const std::string& in_path, double threshold,
               int min_total_degree, const std::string& out_dir) {
  IngestOptions opt;
  opt.threshold = threshold;
  opt.min_total_degree = min_total_degree;
  const IngestResult ingested = ingest_edge_list(in_path, opt);

  fs::create_directories(out_dir);
  std::vector<std::string> files;

  const fs::path edges = fs::path(out_dir) / "edges.csv";
  export_edge_list(edges, ingested.network, ingested.node_ids,
                   ingested.layer_ids);
  files.push_back(edges.string());

  const fs::path report_path = fs::path(out_dir) / "ingest_report.json";
  io::write_text_file(report_path, ingest_report_json(ingested).dump(2) + "\n");
  files.push_back(report_path.string());

  report_written(files);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "scce: common-eigenspace estimation and inference for multi-layer "
      "networks"};
  app.set_version_flag("--version", "scce 1.0.0");
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand(
      "generate", "Sample a benchmark network and write its edge list");
  std::string gen_config;
  std::uint64_t gen_seed = 20240817;
  std::string gen_out = "out";
  generate->add_option("--config", gen_config,
                       "Config file with a [model] section");
  generate->add_option("--seed", gen_seed, "Sampling seed");
  generate->add_option("--out", gen_out, "Output directory");

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "Embed an edge list and estimate per-layer score matrices");
  std::string est_in;
  int est_k = 3;
  std::string est_method = "scce";
  double est_threshold = 0.0;
  int est_min_degree = 0;
  std::string est_out = "out";
  int est_max_index = 15;
  estimate->add_option("--in", est_in, "Edge list (layer,i,j[,weight])")
      ->required();
  estimate->add_option("--k", est_k, "Embedding dimension")
      ->check(CLI::PositiveNumber);
  estimate->add_option("--method", est_method, "Embedding method")
      ->check(CLI::IsMember({"scce", "mase"}));
  estimate->add_option("--threshold", est_threshold,
                       "Weight threshold for edge existence");
  estimate->add_option("--min-total-degree", est_min_degree,
                       "Drop nodes below this total degree");
  estimate->add_option("--out", est_out, "Output directory");
  estimate->add_option("--max-index", est_max_index,
                       "Scree values to export");

  // test
  auto* test = app.add_subcommand(
      "test", "Pairwise homogeneity tests with Holm step-down");
  std::string test_in;
  int test_k = 3;
  double test_alpha = 0.05;
  int test_null_samples = 2000;
  std::uint64_t test_seed = 20240817;
  int test_threads = 1;
  double test_threshold = 0.0;
  int test_min_degree = 0;
  std::string test_out = "out";
  test->add_option("--in", test_in, "Edge list (layer,i,j[,weight])")
      ->required();
  test->add_option("--k", test_k, "Embedding dimension")
      ->check(CLI::PositiveNumber);
  test->add_option("--alpha", test_alpha, "Family-wise error level");
  test->add_option("--null-samples", test_null_samples,
                   "Monte Carlo null samples per pair");
  test->add_option("--seed", test_seed, "Monte Carlo seed");
  test->add_option("--threads", test_threads, "Worker threads");
  test->add_option("--threshold", test_threshold,
                   "Weight threshold for edge existence");
  test->add_option("--min-total-degree", test_min_degree,
                   "Drop nodes below this total degree");
  test->add_option("--out", test_out, "Output directory");

  // experiment
  auto* experiment = app.add_subcommand(
      "experiment", "Run a simulation experiment (preset or config)");
  std::string exp_preset;
  std::string exp_config;
  std::uint64_t exp_seed = 0;
  std::string exp_out;
  double exp_scale = 1.0;
  int exp_threads = 0;
  experiment->add_option("--preset", exp_preset,
                         "Named preset (see --list-presets)");
  experiment->add_option("--config", exp_config, "Experiment config file");
  auto* exp_seed_opt =
      experiment->add_option("--seed", exp_seed, "Override the config seed");
  auto* exp_out_opt =
      experiment->add_option("--out", exp_out, "Override the output directory");
  experiment->add_option("--scale", exp_scale,
                         "Multiply replication counts (smoke runs)");
  auto* exp_threads_opt =
      experiment->add_option("--threads", exp_threads, "Worker threads");
  bool exp_list = false;
  experiment->add_flag("--list-presets", exp_list, "List preset names");

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "Normalize an edge list and report ingestion statistics");
  std::string ing_in;
  double ing_threshold = 0.0;
  int ing_min_degree = 0;
  std::string ing_out = "out";
  ingest->add_option("--in", ing_in, "Edge list (layer,i,j[,weight])")
      ->required();
  ingest->add_option("--threshold", ing_threshold,
                     "Weight threshold for edge existence");
  ingest->add_option("--min-total-degree", ing_min_degree,
                     "Drop nodes below this total degree");
  ingest->add_option("--out", ing_out, "Output directory");

  // scree
  auto* scree = app.add_subcommand(
      "scree", "Scree diagnostic of the aggregated squared adjacencies");
  std::string scree_in;
  int scree_max = 15;
  std::uint64_t scree_seed = 20240817;
  std::string scree_out = "out";
  double scree_threshold = 0.0;
  int scree_min_degree = 0;
  scree->add_option("--in", scree_in,
                    "Edge list; omitted = simulated demo network");
  scree->add_option("--max-index", scree_max, "Values to export")
      ->check(CLI::PositiveNumber);
  scree->add_option("--seed", scree_seed, "Seed for the demo network");
  scree->add_option("--threshold", scree_threshold,
                    "Weight threshold for edge existence");
  scree->add_option("--min-total-degree", scree_min_degree,
                    "Drop nodes below this total degree");
  scree->add_option("--out", scree_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return run_generate(gen_config, gen_seed, gen_out);
    }
    if (estimate->parsed()) {
      return run_estimate(est_in, est_k, est_method, est_threshold,
                          est_min_degree, est_out, est_max_index);
    }
    if (test->parsed()) {
      ExperimentConfig config;
      config.kind = "real-data";
      config.community_count = test_k;
      config.alpha = test_alpha;
      config.null_samples = test_null_samples;
      config.seed = test_seed;
      config.threads = test_threads;
      config.output_dir = test_out;
      config.input_path = test_in;
      config.threshold = test_threshold;
      config.min_total_degree = test_min_degree;
      report_written(run_experiment(config));
      return 0;
    }
    if (experiment->parsed()) {
      if (exp_list) {
        for (const auto& name : ExperimentConfig::preset_names()) {
          std::cout << name << "\n";
        }
        return 0;
      }
      if (exp_preset.empty() == exp_config.empty()) {
        throw std::invalid_argument(
            "experiment needs exactly one of --preset or --config");
      }
      ExperimentConfig config = exp_preset.empty()
                                    ? ExperimentConfig::from_file(exp_config)
                                    : ExperimentConfig::preset(exp_preset);
      if (*exp_seed_opt) config.seed = exp_seed;
      if (*exp_out_opt) config.output_dir = exp_out;
      if (*exp_threads_opt) config.threads = exp_threads;
      if (exp_scale != 1.0) config.apply_scale(exp_scale);
      report_written(run_experiment(config));
      return 0;
    }
    if (ingest->parsed()) {
      return run_ingest(ing_in, ing_threshold, ing_min_degree, ing_out);
    }
    if (scree->parsed()) {
      ExperimentConfig config;
      config.kind = "scree";
      config.seed = scree_seed;
      config.scree_max_index = scree_max;
      config.output_dir = scree_out;
      config.input_path = scree_in;
      config.threshold = scree_threshold;
      config.min_total_degree = scree_min_degree;
      report_written(run_experiment(config));
      return 0;
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}

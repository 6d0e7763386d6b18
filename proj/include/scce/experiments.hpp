#pragma once

#include "scce/inference.hpp"
#include "scce/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scce {

/// Flat INI-style configuration: `key = value` lines, optional [section]
/// headers (keys are scoped as "section.key"; unsectioned keys keep their
/// bare name), `#` or `;` comments. Parse errors carry the line number.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::filesystem::path& path);

/// Everything an experiment run needs. Grids are cartesian over
/// (n, L, rho); the degree-corrected model derives its propensity norm
/// from n unless `propensity_norm` is set explicitly.
struct ExperimentConfig {
  std::string kind;  // bias | coverage | power | holm | scree | real-data
  std::string model = "sbm";  // sbm | dcsbm
  std::vector<int> n_values{300};
  std::vector<int> layer_values{50};
  std::vector<double> rho_values{0.2};
  int community_count = 3;
  int reps = 100;
  double alpha = 0.05;
  int null_samples = 2000;
  int oracle_reps = 2000;
  std::vector<double> offsets{0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
  std::optional<double> propensity_norm;
  std::uint64_t seed = 20240817;
  int threads = 1;
  std::string output_dir = "out";
  std::string input_path;  // real-data / scree-from-file runs
  double threshold = 0.0;
  int min_total_degree = 0;
  int scree_max_index = 15;
  bool with_baseline = true;  // also tabulate the concatenation baseline

  /// Multiplies replication-like counts (reps, null_samples, oracle_reps)
  /// by `scale`, keeping sane minimums. Used for smoke-level runs.
  void apply_scale(double scale);

  void validate() const;

  /// Builds a config from parsed key/value pairs (the "experiment" section
  /// or bare keys). Unknown or unparsable keys raise std::invalid_argument
  /// naming the key.
  static ExperimentConfig from_config(const ConfigMap& map);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// Named presets mirroring the standard benchmark tables and figures.
  static ExperimentConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

/// Runs the configured experiment and writes its outputs (CSV/JSON/SVG)
/// under config.output_dir. Returns the list of files written.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

/// Individual runners, exposed for tests and for the acceptance suite.

struct BiasCell {
  std::string model;
  int n = 0;
  int L = 0;
  double rho = 0.0;
  int reps = 0;
  double mean_bias = 0.0;    // mean over reps of the per-rep layer mean
  double median_bias = 0.0;  // median over reps of the same quantity
};

std::vector<BiasCell> run_bias_experiment(const ExperimentConfig& config);

struct CoverageCell {
  std::string model;
  std::string method;  // "scce" or "baseline"
  int n = 0;
  int L = 0;
  double rho = 0.0;
  int reps = 0;
  double alpha = 0.0;
  CoverageResult result;
};

std::vector<CoverageCell> run_coverage_experiment(
    const ExperimentConfig& config);

PowerCurveResult run_power_experiment(const ExperimentConfig& config);

struct HolmRun {
  int run = 0;
  bool recovered_exactly = false;
  int within_rejections = 0;  // false positives inside the two blocks
  int cross_acceptances = 0;  // misses across the two blocks
  HolmOutcome outcome;
  std::vector<PairTestResult> tests;
};

struct HolmExperimentResult {
  std::vector<HolmRun> runs;
  double recovery_rate = 0.0;
};

HolmExperimentResult run_holm_experiment(const ExperimentConfig& config);

struct ScreeResult {
  Vector values;  // |eigenvalue| ordering of the aggregate / n
};

ScreeResult run_scree_experiment(const ExperimentConfig& config);

}  // namespace scce

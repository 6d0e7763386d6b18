// Acceptance gate: ten end-to-end checks against the published benchmark
// targets, one [PASS]/[FAIL] line each. Run with --only N[,M...] to
// restrict, --cli PATH to point at the command-line binary (criterion 10).
#include <CLI11.hpp>

#include <scce/embedding.hpp>
#include <scce/estimator.hpp>
#include <scce/experiments.hpp>
#include <scce/generator.hpp>
#include <scce/inference.hpp>
#include <scce/model.hpp>
#include <scce/rng.hpp>
#include <scce/stats.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace scce;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

Matrix random_orthonormal(int n, int K, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, K);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < K; ++j) x(i, j) = normal(gen);
  }
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix q = qr.householderQ();
  return q.leftCols(K);
}

// ---------------------------------------------------------------------------
// 1. Coverage of the 95% score intervals, plain model.

Outcome criterion_coverage_sbm() {
  auto cell = [](int n, double rho) {
    ExperimentConfig c;
    c.kind = "coverage";
    c.model = "sbm";
    c.n_values = {n};
    c.layer_values = {100};
    c.rho_values = {rho};
    c.reps = 200;
    c.seed = 1001;
    c.with_baseline = false;
    return run_coverage_experiment(c).front().result.coverage;
  };
  const double a = cell(500, 0.3);
  const double b = cell(300, 0.2);
  Outcome out;
  out.pass = std::abs(a - 0.929) <= 0.03 && std::abs(b - 0.929) <= 0.03;
  out.detail = "coverage(500,100,0.3)=" + fmt(a) +
               ", coverage(300,100,0.2)=" + fmt(b) + " (target 0.929 +/- 0.03)";
  return out;
}

// ---------------------------------------------------------------------------
// 2. Coverage, degree-corrected model.

Outcome criterion_coverage_dcsbm() {
  ExperimentConfig c;
  c.kind = "coverage";
  c.model = "dcsbm";
  c.n_values = {300};
  c.layer_values = {100};
  c.rho_values = {0.3};
  c.reps = 200;
  c.seed = 1002;
  c.with_baseline = false;
  const double cov = run_coverage_experiment(c).front().result.coverage;
  Outcome out;
  out.pass = std::abs(cov - 0.915) <= 0.04;
  out.detail = "coverage(300,100,0.3,beta=10.4)=" + fmt(cov) +
               " (target 0.915 +/- 0.04)";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Bias decay in L at small rho, flat at large rho.

Outcome criterion_bias_decay() {
  ExperimentConfig c;
  c.kind = "bias";
  c.model = "sbm";
  c.n_values = {500};
  c.layer_values = {20, 60, 180};
  c.rho_values = {0.05, 0.3};
  c.reps = 50;
  c.seed = 1003;
  const std::vector<BiasCell> cells = run_bias_experiment(c);

  std::map<std::pair<int, double>, double> median;
  for (const BiasCell& cell : cells) median[{cell.L, cell.rho}] = cell.median_bias;
  const double s20 = median.at({20, 0.05});
  const double s60 = median.at({60, 0.05});
  const double s180 = median.at({180, 0.05});
  const double f20 = median.at({20, 0.3});
  const double f60 = median.at({60, 0.3});
  const double f180 = median.at({180, 0.3});

  const bool decays = s20 > s60 && s60 > s180;
  const double fmax = std::max({f20, f60, f180});
  const double fmin = std::min({f20, f60, f180});
  const bool flat = (fmax - fmin) / fmax < 0.25;

  Outcome out;
  out.pass = decays && flat;
  out.detail = "rho=0.05 medians (L=20,60,180) = " + fmt(s20) + " > " +
               fmt(s60) + " > " + fmt(s180) +
               (decays ? " [strictly decreasing]" : " [NOT decreasing]") +
               "; rho=0.3 relative spread " + fmt((fmax - fmin) / fmax) +
               " (< 0.25 required)";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Finite-sample normality of the standardized scores with the true
//    basis and the population covariance.

Outcome criterion_clt() {
  const int n = 500;
  const double rho = 0.2;
  const int reps = 2000;
  const BlockModelSpec spec =
      benchmark_spec(n, 1, rho, benchmark_scales_a(), benchmark_scales_b());
  const PopulationDecomposition pop = population_decomposition(spec);
  const Matrix q = pop.population_matrix(0);
  const CovarianceEstimate sigma = population_covariance(pop, 0);
  const int d = static_cast<int>(sigma.matrix.rows());
  Eigen::LDLT<Matrix> solver(sigma.matrix);

  std::vector<std::vector<double>> entry(
      static_cast<std::size_t>(d), std::vector<double>());
  std::vector<double> mahalanobis;
  mahalanobis.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const MultiLayerNetwork net =
        sample_network(spec, keyed(6104, static_cast<std::uint64_t>(r)));
    const Matrix g = noise_matrix(net, q, 0);
    const Vector v =
        vectorize_upper(symmetrized(pop.basis.transpose() * g * pop.basis));
    for (int a = 0; a < d; ++a) {
      entry[static_cast<std::size_t>(a)].push_back(
          v[a] / std::sqrt(sigma.matrix(a, a)));
    }
    mahalanobis.push_back(v.dot(solver.solve(v)));
  }

  double min_p_entry = 1.0;
  for (int a = 0; a < d; ++a) {
    const KsResult ks =
        ks_test(entry[static_cast<std::size_t>(a)],
                [](double x) { return normal_cdf(x); });
    min_p_entry = std::min(min_p_entry, ks.p_value);
  }
  const KsResult ks_m = ks_test(
      mahalanobis, [d](double x) { return chi_squared_cdf(x, d); });

  Outcome out;
  out.pass = min_p_entry >= 0.01 && ks_m.p_value >= 0.01;
  out.detail = "KS vs N(0,1): min p over " + std::to_string(d) +
               " entries = " + fmt(min_p_entry) +
               "; KS vs chi^2(" + std::to_string(d) +
               ") p = " + fmt(ks_m.p_value) + " (both must be >= 0.01)";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Covariance formula vs brute force and vs Monte Carlo.

Matrix brute_force_covariance(const Matrix& basis, const Matrix& q) {
  const int n = static_cast<int>(basis.rows());
  const int K = static_cast<int>(basis.cols());
  const int d = vec_dim(K);
  Matrix sigma = Matrix::Zero(d, d);
  for (int t = 1; t <= K; ++t) {
    for (int s = 1; s <= t; ++s) {
      for (int t2 = 1; t2 <= K; ++t2) {
        for (int s2 = 1; s2 <= t2; ++s2) {
          double sum = 0.0;
          for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
              const double w1 = basis(i, s - 1) * basis(j, t - 1) +
                                basis(j, s - 1) * basis(i, t - 1);
              const double w2 = basis(i, s2 - 1) * basis(j, t2 - 1) +
                                basis(j, s2 - 1) * basis(i, t2 - 1);
              sum += w1 * w2 * q(i, j) * (1.0 - q(i, j));
            }
          }
          sigma(vec_index(s, t, K) - 1, vec_index(s2, t2, K) - 1) = sum;
        }
      }
    }
  }
  return sigma;
}

Outcome criterion_covariance_oracle() {
  std::mt19937_64 gen(4242);
  std::uniform_real_distribution<double> uq(0.05, 0.95);
  std::uniform_int_distribution<int> un(4, 8);
  std::uniform_int_distribution<int> uk(1, 3);
  double worst = 0.0;
  for (int rep = 0; rep < 120; ++rep) {
    const int n = un(gen);
    const int K = std::min(uk(gen), n - 1);
    const Matrix basis = random_orthonormal(n, K, gen);
    Matrix q(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) q(i, j) = q(j, i) = uq(gen);
    }
    const Matrix fast = score_covariance_from_probabilities(basis, q, 0);
    const Matrix slow = brute_force_covariance(basis, q);
    worst = std::max(worst, (fast - slow).cwiseAbs().maxCoeff());
  }
  const bool brute_ok = worst < 1e-12;

  // Monte Carlo cross-check at 20000 draws on a two-community model.
  BlockModelSpec spec;
  spec.community_count = 2;
  spec.membership.assign(40, 0);
  for (int i = 20; i < 40; ++i) spec.membership[static_cast<std::size_t>(i)] = 1;
  Matrix b(2, 2);
  b << 0.6, 0.3, 0.3, 0.8;
  spec.connectivity = {b};
  spec.sparsity = 0.5;
  const PopulationDecomposition pop = population_decomposition(spec);
  const Matrix q = pop.population_matrix(0);
  const int n = 40;
  const int d = vec_dim(2);

  std::mt19937_64 mc_gen(90210);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int draws = 20000;
  Matrix sum = Matrix::Zero(d, d);
  for (int t = 0; t < draws; ++t) {
    Matrix g = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double edge = unif(mc_gen) < q(i, j) ? 1.0 : 0.0;
        g(i, j) = g(j, i) = edge - q(i, j);
      }
    }
    const Vector v =
        vectorize_upper(symmetrized(pop.basis.transpose() * g * pop.basis));
    sum += v * v.transpose();
  }
  const Matrix mc = sum / draws;
  const Matrix sigma = population_covariance(pop, 0).matrix;
  double worst_rel = 0.0;
  for (int a = 0; a < d; ++a) {
    for (int c = 0; c < d; ++c) {
      const double scale = std::sqrt(sigma(a, a) * sigma(c, c));
      worst_rel = std::max(worst_rel, std::abs(sigma(a, c) - mc(a, c)) / scale);
    }
  }
  const bool mc_ok = worst_rel <= 0.05;

  Outcome out;
  out.pass = brute_ok && mc_ok;
  out.detail = "max |formula - brute force| = " + fmt(worst, 16) +
               " (< 1e-12); max MC deviation = " + fmt(worst_rel) +
               " of scale (<= 0.05) at 20000 draws";
  return out;
}

// ---------------------------------------------------------------------------
// 6. Zero-noise exactness on random specs, both models.

Outcome criterion_zero_noise() {
  std::mt19937_64 gen(777);
  std::uniform_real_distribution<double> ub(0.2, 0.9);
  std::uniform_real_distribution<double> upsi(0.5, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 6; ++rep) {
    const bool degree_corrected = rep >= 3;
    const int K = 2 + rep % 2;
    const int n = 30 + 5 * rep;
    BlockModelSpec spec;
    spec.community_count = K;
    spec.membership = BlockModelSpec::membership_from_proportions(
        n, std::vector<double>(static_cast<std::size_t>(K),
                               1.0 / static_cast<double>(K)));
    const int L = 3;
    for (int l = 0; l < L; ++l) {
      Matrix b = Matrix::Zero(K, K);
      for (int i = 0; i < K; ++i) {
        for (int j = i; j < K; ++j) b(i, j) = b(j, i) = ub(gen);
      }
      for (int i = 0; i < K; ++i) b(i, i) = std::max(b(i, i), 0.6);
      spec.connectivity.push_back(b);
    }
    spec.sparsity = 0.8;
    if (degree_corrected) {
      Vector psi(n);
      for (int i = 0; i < n; ++i) psi[i] = upsi(gen);
      spec.degree_propensity = psi;
    }
    spec.validate();

    const PopulationDecomposition pop = population_decomposition(spec);
    std::vector<Matrix> layers;
    for (int l = 0; l < L; ++l) layers.push_back(pop.population_matrix(l));
    const EigenspaceEstimate emb =
        leading_eigenspace(aggregate_squares(layers), K);
    const ScoreEstimate scores = estimate_scores(layers, emb);
    const AlignmentResult align = procrustes_align(pop.basis, emb.basis);
    for (int l = 0; l < L; ++l) {
      const Matrix rotated = align.rotation *
                             scores.scores[static_cast<std::size_t>(l)] *
                             align.rotation.transpose();
      worst = std::max(worst,
                       (rotated - pop.scores[static_cast<std::size_t>(l)])
                           .cwiseAbs()
                           .maxCoeff());
    }
  }
  Outcome out;
  out.pass = worst < 1e-8;
  out.detail =
      "max |Z M_hat Z^T - M| over 3 plain + 3 degree-corrected specs = " +
      fmt(worst, 12) + " (< 1e-8)";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Power curve shape and oracle agreement.

Outcome criterion_power() {
  const ExperimentConfig c = ExperimentConfig::preset("figure2");
  const PowerCurveResult curve = run_power_experiment(c);
  const std::vector<PowerPoint>& p = curve.points;

  Outcome out;
  if (p.empty() || p.front().offset != 0.0) {
    out.detail = "power grid missing the zero-separation point";
    return out;
  }
  const double at_zero = p.front().power;
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p[i + 1].power < p[i].power) ++inversions;
  }
  const double at_max = p.back().power;
  const bool size_ok = std::abs(at_zero - c.alpha) <= 0.07;
  const bool shape_ok = inversions <= 1;
  const bool power_ok = at_max >= 0.9;
  const bool agree_ok = curve.overall_agreement >= 0.80;

  out.pass = size_ok && shape_ok && power_ok && agree_ok;
  std::string curve_str;
  for (const PowerPoint& point : p) {
    curve_str += (curve_str.empty() ? "" : " ") + fmt(point.power, 2);
  }
  out.detail = "power at 0 = " + fmt(at_zero) + " (alpha " + fmt(c.alpha, 2) +
               " +/- 0.07), curve [" + curve_str + "], inversions " +
               std::to_string(inversions) + " (<= 1), power at max = " +
               fmt(at_max) + " (>= 0.9), oracle agreement = " +
               fmt(curve.overall_agreement) + " (>= 0.80)";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Holm two-block recovery rate.

Outcome criterion_holm() {
  const ExperimentConfig c = ExperimentConfig::preset("figure3");
  const HolmExperimentResult res = run_holm_experiment(c);
  int recovered = 0;
  for (const HolmRun& run : res.runs) {
    if (run.recovered_exactly) ++recovered;
  }
  Outcome out;
  out.pass = res.recovery_rate >= 0.9;
  out.detail = "exact two-block recovery in " + std::to_string(recovered) +
               "/" + std::to_string(c.reps) + " seeded runs = " +
               fmt(res.recovery_rate) + " (>= 0.9)";
  return out;
}

// ---------------------------------------------------------------------------
// 9. Procrustes optimality against an O(2) grid.

Outcome criterion_procrustes() {
  std::mt19937_64 gen(515151);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * M_PI);
  const int grid_steps = 70000;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix reference = random_orthonormal(8, 2, gen);
    const double angle = uniform(gen);
    Matrix r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Matrix noisy = reference * r;
    for (int i = 0; i < noisy.rows(); ++i) {
      for (int j = 0; j < 2; ++j) noisy(i, j) += 0.05 * normal(gen);
    }
    Eigen::HouseholderQR<Matrix> qr(noisy);
    const Matrix estimate = Matrix(qr.householderQ()).leftCols(2);

    const Matrix cross = reference.transpose() * estimate;
    double best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid_steps; ++g) {
      const double th = 2.0 * M_PI * g / grid_steps;
      const double cth = std::cos(th), sth = std::sin(th);
      Matrix rot(2, 2), ref(2, 2);
      rot << cth, -sth, sth, cth;
      ref << cth, sth, sth, -cth;
      best = std::min({best, (cross - rot).norm(), (cross - ref).norm()});
    }
    const AlignmentResult res = procrustes_align(reference, estimate);
    worst = std::max(worst, res.residual - best);
  }
  Outcome out;
  out.pass = worst <= 1e-4;
  out.detail = "max excess residual over 100 K=2 cases = " + fmt(worst, 8) +
               " (<= 1e-4 vs 70000-point grid)";
  return out;
}

// ---------------------------------------------------------------------------
// 10. Byte-identical CSV summaries across reruns and thread counts.

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::map<std::string, std::string> csv_map(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      out[entry.path().filename().string()] = read_bytes(entry.path());
    }
  }
  return out;
}

Outcome criterion_determinism(const std::string& cli) {
  Outcome out;
  if (cli.empty()) {
    out.detail = "no --cli path provided";
    return out;
  }
  const fs::path base =
      fs::temp_directory_path() / "scce_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);

  int checked_files = 0;
  std::string failure;
  for (const std::string& preset : ExperimentConfig::preset_names()) {
    std::vector<fs::path> dirs;
    for (int run = 0; run < 3; ++run) {
      const fs::path dir = base / (preset + "_" + std::to_string(run));
      const int threads = run == 2 ? 2 : 1;
      std::ostringstream cmd;
      cmd << cli << " experiment --preset " << preset
          << " --scale 0.005 --threads " << threads << " --out " << dir
          << " > /dev/null 2>&1";
      if (std::system(cmd.str().c_str()) != 0) {
        out.detail = "CLI run failed for preset " + preset;
        fs::remove_all(base);
        return out;
      }
      dirs.push_back(dir);
    }
    const auto first = csv_map(dirs[0]);
    if (first.empty()) {
      failure = "preset " + preset + " wrote no CSV files";
      break;
    }
    for (int run = 1; run < 3 && failure.empty(); ++run) {
      const auto other = csv_map(dirs[static_cast<std::size_t>(run)]);
      if (other.size() != first.size()) {
        failure = "preset " + preset + " wrote a different file set on run " +
                  std::to_string(run);
        break;
      }
      for (const auto& [name, bytes] : first) {
        auto it = other.find(name);
        if (it == other.end() || it->second != bytes) {
          failure = "preset " + preset + ": " + name +
                    " differs on rerun " + std::to_string(run) +
                    (run == 2 ? " (--threads 2)" : "");
          break;
        }
        ++checked_files;
      }
    }
    if (!failure.empty()) break;
  }
  fs::remove_all(base);
  out.pass = failure.empty();
  out.detail = failure.empty()
                   ? std::to_string(checked_files) +
                         " CSV byte comparisons across reruns and --threads "
                         "1 vs 2, all identical"
                   : failure;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli_path;
  std::string only;
  app.add_option("--cli", cli_path, "Path to the command-line binary");
  app.add_option("--only", only, "Comma-separated criterion numbers to run");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  if (!only.empty()) {
    std::istringstream stream(only);
    std::string field;
    while (std::getline(stream, field, ',')) {
      selected.insert(std::stoi(field));
    }
  }

  struct Criterion {
    int number;
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "coverage, plain model", criterion_coverage_sbm},
      {2, "coverage, degree-corrected model", criterion_coverage_dcsbm},
      {3, "bias decay in L", criterion_bias_decay},
      {4, "standardized-score normality", criterion_clt},
      {5, "covariance oracle equivalence", criterion_covariance_oracle},
      {6, "zero-noise exactness", criterion_zero_noise},
      {7, "power curve and oracle agreement", criterion_power},
      {8, "Holm two-block recovery", criterion_holm},
      {9, "Procrustes optimality", criterion_procrustes},
      {10, "deterministic CSV summaries",
       [&] { return criterion_determinism(cli_path); }},
  };

  int failures = 0;
  int ran = 0;
  for (const Criterion& criterion : criteria) {
    if (!selected.empty() && !selected.count(criterion.number)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion "
              << criterion.number << " (" << criterion.name
              << "): " << outcome.detail << " [" << fmt(seconds, 1) << "s]"
              << std::endl;
  }

  std::cout << (failures == 0 ? "ACCEPTED" : "REJECTED") << ": " << ran
            << " criteria run, " << failures << " failed" << std::endl;
  return failures == 0 ? 0 : 1;
}

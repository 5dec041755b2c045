#pragma once

// Experiment driver: configuration, synthetic noisy data and CSV output for
// sweeps over resolution, method, precision and noise seed.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regscale/multiscale.hpp"
#include "regscale/problem.hpp"

namespace regscale {

struct NoiseSettings {
  double nu = 0.0;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentConfig {
  std::string kernel_family = "gravity";
  double d = 0.25;
  SourceSpec source = SourceSpec::smooth_sine();
  std::size_t N = 3000;
  std::vector<std::size_t> resolutions{1000};
  std::vector<Method> methods{Method::UPRE, Method::GCV};
  std::vector<double> epsilon_list{1e-5};
  NoiseSettings noise;
  std::filesystem::path output_dir = "out";
  Assembly assembly = Assembly::Midpoint;
  std::size_t grid_points = 200;
  std::size_t refine_iters = 40;
  double tau = 1.0;
};

/// JSON text with the ExperimentConfig key names. Missing keys keep defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
KernelSpec kernel_spec(const ExperimentConfig& cfg);

struct NoisyData {
  std::vector<double> g;
  double zeta_e = 0.0;  // nu * max_j g_clean_j
};

/// g + nu * max(g) * e with e ~ N(0,1) i.i.d. from std::mt19937_64(seed) and
/// std::normal_distribution. nu = 0 returns g unchanged.
NoisyData gen_noise(const std::vector<double>& g_clean, double nu, std::uint64_t seed);

struct ErrorRow {
  std::size_t n = 0;
  Method method = Method::UPRE;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double relative_error = 0.0;
  double lambda_tilde = 0.0;
  double lambda = 0.0;
  std::size_t p = 0;
  bool boundary = false;
  double max_abs_f = 0.0;
};

/// Formats a double with 17 significant digits.
std::string csv_number(double v);

/// Holds the clean data, the per-resolution solvers and the noisy
/// realizations for one configuration.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg);

  [[nodiscard]] const ExperimentConfig& config() const { return cfg_; }
  [[nodiscard]] const std::vector<double>& clean_data() const { return g_clean_; }
  [[nodiscard]] const std::vector<double>& truth() const { return truth_; }
  [[nodiscard]] double max_g() const;

  const NoisyData& data(std::uint64_t seed);
  MultiscaleSolver& solver(std::size_t n);
  MultiscaleConfig cell_config(std::size_t n, Method method, double epsilon, std::uint64_t seed);

  RegularizedSolution solve(std::size_t n, Method method, double epsilon, std::uint64_t seed);
  ErrorRow error_row(std::size_t n, Method method, double epsilon, std::uint64_t seed);

  std::filesystem::path write_delta();
  std::filesystem::path write_spectrum();
  std::filesystem::path write_functionals();
  std::filesystem::path write_picard();
  std::filesystem::path write_errors();
  std::filesystem::path write_maxg();
  std::filesystem::path write_solution(std::size_t n, Method method, double epsilon, std::uint64_t seed);

 private:
  std::uint64_t diagnostic_seed() const;
  std::filesystem::path out_path(const std::string& name) const;

  ExperimentConfig cfg_;
  KernelSpec spec_;
  Grid fine_grid_;
  std::vector<double> g_clean_;
  std::vector<double> truth_;
  std::map<std::uint64_t, NoisyData> noisy_;
  std::map<std::size_t, std::unique_ptr<MultiscaleSolver>> solvers_;
  std::shared_ptr<const Factorization> fine_shared_;
};

/// Writes delta, spectrum and picard; maxg, functionals and errors as well
/// when the method list is nonempty. Returns the files written.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg);

}  // namespace regscale

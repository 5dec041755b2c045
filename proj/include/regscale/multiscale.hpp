#pragma once

// Coarse-to-fine regularized solves: estimate the regularization parameter on
// a downsampled system, transfer it, and filter the dominant singular triplets
// of the fine system.

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "regscale/galerkin.hpp"
#include "regscale/regparam.hpp"
#include "regscale/spectral.hpp"

namespace regscale {

struct NoiseMode {
  enum class Kind { NoiseFree, White };
  Kind kind = Kind::NoiseFree;
  double zeta_e = 0.0;  // standard deviation of the noise on each data sample

  static NoiseMode noise_free() { return {}; }
  static NoiseMode white(double zeta_e) { return {Kind::White, zeta_e}; }
};

struct MultiscaleConfig {
  std::size_t N = 3000;
  std::size_t ell = 3;
  double epsilon = 1e-5;
  Method method = Method::UPRE;
  NoiseMode noise_mode;
  SearchConfig search;  // empty lambda_grid -> default grid on the coarse spectrum
  std::size_t grid_points = 200;
  Assembly assembly = Assembly::Midpoint;
};

struct RegularizedSolution {
  std::vector<double> values;       // f(t_k) at the fine midpoints
  double lambda_tilde_used = 0.0;   // parameter applied as q(., sigma) on the unweighted fine spectrum
  std::size_t p_used = 0;
  Grid grid;
  Method method = Method::UPRE;
  LambdaEstimate estimate;          // coarse-scale estimate that produced lambda_tilde_used
};

/// f(t_k) = (1/sqrt(dt)) sum_{i<p} q(lambda_tilde, sigma_i) beta_i / sigma_i V_ki.
RegularizedSolution solve_truncated(const SpectralSystem& sys, double lambda_tilde, std::size_t p,
                                    const Grid& grid_t);

/// Fine and coarse operators for one kernel and resolution pair, with the
/// factorizations computed on first use and reused across right-hand sides.
/// Not safe for concurrent use; give each thread its own instance.
class MultiscaleSolver {
 public:
  MultiscaleSolver(KernelSpec spec, std::size_t N, std::size_t ell, Assembly assembly);

  [[nodiscard]] const KernelSpec& kernel() const { return spec_; }
  [[nodiscard]] const Grid& fine_grid() const { return fine_grid_; }
  [[nodiscard]] const Grid& coarse_grid() const { return coarse_grid_; }
  [[nodiscard]] std::size_t ell() const { return ell_; }
  [[nodiscard]] const Eigen::MatrixXd& fine_matrix() const { return A_fine_; }
  [[nodiscard]] const Eigen::MatrixXd& coarse_matrix() const { return A_coarse_; }

  std::shared_ptr<const Factorization> coarse_factors();
  /// At least p dominant triplets of the fine matrix.
  std::shared_ptr<const Factorization> fine_factors(std::size_t p);
  /// Reuse dominant fine triplets computed elsewhere for the same matrix.
  void set_fine_factors(std::shared_ptr<const Factorization> f);
  [[nodiscard]] std::shared_ptr<const Factorization> cached_fine_factors() const { return fine_; }

  /// Coarse spectral system for fine-resolution samples g (length N).
  SpectralSystem coarse_system(std::span<const double> g);

  /// Algorithm without noise weighting: lambda from the coarse system with
  /// zeta^2 = 1, used unchanged at the fine scale.
  RegularizedSolution run_noise_free(const MultiscaleConfig& cfg, std::span<const double> g_samples);

  /// White-noise algorithm: whiten by zeta_e, estimate lambda_tilde with
  /// zeta^2 = ds on the coarse spectrum, reuse lambda_tilde at the fine scale.
  RegularizedSolution run_with_noise(const MultiscaleConfig& cfg, std::span<const double> g_obs);

  /// Dispatches on cfg.noise_mode.
  RegularizedSolution run(const MultiscaleConfig& cfg, std::span<const double> g);

 private:
  RegularizedSolution finish(const MultiscaleConfig& cfg, std::span<const double> g, double scale, bool tilde);

  KernelSpec spec_;
  std::size_t ell_;
  Grid fine_grid_;
  Grid coarse_grid_;
  Eigen::MatrixXd A_fine_;
  Eigen::MatrixXd A_coarse_;
  std::shared_ptr<const Factorization> coarse_;
  std::shared_ptr<const Factorization> fine_;
};

/// One-shot versions; build a MultiscaleSolver internally.
RegularizedSolution run_noise_free(const MultiscaleConfig& cfg, const KernelSpec& spec,
                                   std::span<const double> g_samples);
RegularizedSolution run_with_noise(const MultiscaleConfig& cfg, const KernelSpec& spec,
                                   std::span<const double> g_obs);

/// ||values - truth|| / ||truth||.
double relative_error(const RegularizedSolution& sol, std::span<const double> truth);
double relative_error(std::span<const double> values, std::span<const double> truth);

}  // namespace regscale

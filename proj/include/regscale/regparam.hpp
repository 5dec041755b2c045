#pragma once

// Truncated regularization-parameter functionals (discrepancy, augmented
// chi^2, predictive risk, generalized cross validation) and the 1-D search
// that minimizes them.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "regscale/spectral.hpp"

namespace regscale {

enum class Method { MDP, ADP, UPRE, GCV };

std::string_view method_name(Method m);
/// Case-insensitive "mdp", "adp", "upre", "gcv".
Method parse_method(std::string_view name);

struct SearchConfig {
  std::vector<double> lambda_grid;  // ascending, positive, at least two points
  std::size_t refine_iters = 40;    // golden-section steps in the bracketing cell
  double zeta_sq = 1.0;             // noise variance per coefficient
  double tau = 1.0;                 // MDP target is zeta_sq * tau * p
};

struct LambdaEstimate {
  Method method = Method::GCV;
  double lambda = 0.0;
  double lambda_tilde = 0.0;  // sqrt(ds) * lambda
  std::size_t p = 0;
  double functional_at_min = 0.0;  // value of the minimized objective
  bool grid_hit_boundary = false;
  double grid_cell_log10 = 0.0;     // log10 width of one search-grid cell at the argmin
  double bracket_log10 = 0.0;       // log10 width of the final golden-section bracket
};

/// Log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// [sigma_p * 1e-2, sigma_1 * 1e2], `count` log-spaced points.
std::vector<double> default_lambda_grid(std::span<const double> sigma, std::size_t p, std::size_t count = 200);

/// sigma^2 / (lambda^2 + sigma^2). InputError for sigma <= 0.
double filter_factor(double lambda, double sigma);

/// sum_{i<p} z_i^2 (lambda^2 / (a_i^2 + lambda^2))^k, k in {1, 2}.
double eta(double lambda, std::size_t p, int k, std::span<const double> a, std::span<const double> z);

/// Raw functional value: D_T, C_T, U_T or G_T. `N` is the data length used by
/// GCV; G_T's denominator is (N - sum_{i<=p} q_i)^2.
double functional_value(Method method, double lambda, const SpectralSystem& sys, std::size_t p,
                        const SearchConfig& cfg, std::size_t N);

/// Quantity minimized by the search: |D_T - zeta^2 tau p| for MDP,
/// |C_T - zeta^2 p| for ADP, the functional itself for UPRE and GCV.
double search_objective(Method method, double lambda, const SpectralSystem& sys, std::size_t p,
                        const SearchConfig& cfg, std::size_t N);

/// Grid argmin (ties to the smallest lambda) followed by golden-section
/// refinement in log(lambda) over the neighbouring cells. The search variable
/// is lambda; lambda_tilde = sqrt(ds) * lambda.
LambdaEstimate estimate_lambda(Method method, const SpectralSystem& sys, std::size_t p, const SearchConfig& cfg,
                               std::size_t N, double ds);

/// Same search, but the minimizer is taken as lambda_tilde (unweighted
/// coefficients with zeta_sq = ds); lambda = lambda_tilde / sqrt(ds).
LambdaEstimate estimate_lambda_tilde(Method method, const SpectralSystem& sys, std::size_t p,
                                     const SearchConfig& cfg, std::size_t N, double ds);

double scale_lambda(double lambda, double ds);
double unscale_lambda(double lambda_tilde, double ds);

}  // namespace regscale

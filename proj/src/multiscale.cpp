#include "regscale/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regscale/error.hpp"
#include "regscale/simd.hpp"

namespace regscale {

RegularizedSolution solve_truncated(const SpectralSystem& sys, double lambda_tilde, std::size_t p,
                                    const Grid& grid_t) {
  if (p > sys.k()) throw InputError("solve_truncated: p exceeds the available singular triplets");
  if (!(lambda_tilde >= 0.0)) throw InputError("solve_truncated: lambda must be nonnegative");
  if (static_cast<std::size_t>(sys.V().rows()) != grid_t.n)
    throw InputError("solve_truncated: grid does not match the solution dimension");

  Eigen::VectorXd coeff(static_cast<Eigen::Index>(p));
  simd::filtered_coefficients(lambda_tilde, sys.sigma_span(p), sys.beta_span(p), {coeff.data(), p});
  const Eigen::VectorXd x = sys.V().leftCols(static_cast<Eigen::Index>(p)) * coeff;

  RegularizedSolution sol;
  sol.values.resize(grid_t.n);
  const double inv_sqrt_dt = 1.0 / std::sqrt(grid_t.ds);
  for (std::size_t k = 0; k < grid_t.n; ++k) sol.values[k] = x[static_cast<Eigen::Index>(k)] * inv_sqrt_dt;
  sol.lambda_tilde_used = lambda_tilde;
  sol.p_used = p;
  sol.grid = grid_t;
  return sol;
}

MultiscaleSolver::MultiscaleSolver(KernelSpec spec, std::size_t N, std::size_t ell, Assembly assembly)
    : spec_(std::move(spec)), ell_(ell) {
  if (ell == 0 || N % ell != 0)
    throw InputError("fine size " + std::to_string(N) + " is not divisible by ell = " + std::to_string(ell));
  if (N / ell < 2) throw InputError("coarse resolution N/ell must be at least 2");
  fine_grid_ = make_grid(N);
  coarse_grid_ = make_grid(N / ell);
  A_fine_ = build_matrix(spec_, fine_grid_, fine_grid_, assembly);
  A_coarse_ = downsample_matrix(A_fine_, ell);
}

std::shared_ptr<const Factorization> MultiscaleSolver::coarse_factors() {
  if (!coarse_) coarse_ = factorize(A_coarse_);
  return coarse_;
}

std::shared_ptr<const Factorization> MultiscaleSolver::fine_factors(std::size_t p) {
  if (ell_ == 1) return coarse_factors();
  if (!fine_ || static_cast<std::size_t>(fine_->sigma.size()) < p)
    fine_ = factorize(A_fine_, std::min(fine_grid_.n, std::max<std::size_t>(p, 64)));
  return fine_;
}

void MultiscaleSolver::set_fine_factors(std::shared_ptr<const Factorization> f) {
  if (!f || static_cast<std::size_t>(f->V.rows()) != fine_grid_.n)
    throw InputError("fine factorization does not match the fine resolution");
  fine_ = std::move(f);
}

SpectralSystem MultiscaleSolver::coarse_system(std::span<const double> g) {
  if (g.size() != fine_grid_.n) throw InputError("data length does not match the fine resolution");
  const auto coarse = downsample_samples(g, ell_);
  return SpectralSystem(coarse_factors(), data_coefficients(coarse, coarse_grid_.ds));
}

RegularizedSolution MultiscaleSolver::finish(const MultiscaleConfig& cfg, std::span<const double> g, double scale,
                                             bool tilde) {
  if (!(cfg.epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (cfg.N != fine_grid_.n || cfg.ell != ell_) throw InputError("config resolution does not match the solver");

  const SpectralSystem coarse = coarse_system(g);
  const std::size_t p = numerical_rank(coarse.sigma_span(coarse.k()), cfg.epsilon);
  if (p == 0) throw NumericError("numerical rank is zero at epsilon = " + std::to_string(cfg.epsilon));

  SearchConfig search = cfg.search;
  if (search.lambda_grid.empty()) search.lambda_grid = default_lambda_grid(coarse.sigma_span(coarse.k()), p, cfg.grid_points);
  search.zeta_sq = tilde ? coarse_grid_.ds : 1.0;

  const LambdaEstimate est = tilde
      ? estimate_lambda_tilde(cfg.method, coarse, p, search, coarse_grid_.n, coarse_grid_.ds)
      : estimate_lambda(cfg.method, coarse, p, search, coarse_grid_.n, coarse_grid_.ds);
  const double filter_param = tilde ? est.lambda_tilde : est.lambda;

  auto fine_f = fine_factors(p);
  if (static_cast<std::size_t>(fine_f->sigma.size()) < p)
    throw NumericError("fine matrix has fewer than p positive singular values");
  const SpectralSystem fine(fine_f, data_coefficients(g, fine_grid_.ds));
  RegularizedSolution sol = solve_truncated(fine, filter_param, p, fine_grid_);
  if (scale != 1.0)
    for (double& v : sol.values) v *= scale;
  sol.method = cfg.method;
  sol.estimate = est;
  return sol;
}

RegularizedSolution MultiscaleSolver::run_noise_free(const MultiscaleConfig& cfg, std::span<const double> g_samples) {
  return finish(cfg, g_samples, 1.0, false);
}

RegularizedSolution MultiscaleSolver::run_with_noise(const MultiscaleConfig& cfg, std::span<const double> g_obs) {
  const double ze = cfg.noise_mode.zeta_e;
  if (!(ze > 0.0) || !std::isfinite(ze)) throw InputError("noise standard deviation zeta_e must be positive");
  std::vector<double> whitened(g_obs.begin(), g_obs.end());
  for (double& v : whitened) v /= ze;
  return finish(cfg, whitened, ze, true);
}

RegularizedSolution MultiscaleSolver::run(const MultiscaleConfig& cfg, std::span<const double> g) {
  return cfg.noise_mode.kind == NoiseMode::Kind::White ? run_with_noise(cfg, g) : run_noise_free(cfg, g);
}

RegularizedSolution run_noise_free(const MultiscaleConfig& cfg, const KernelSpec& spec,
                                   std::span<const double> g_samples) {
  MultiscaleSolver solver(spec, cfg.N, cfg.ell, cfg.assembly);
  return solver.run_noise_free(cfg, g_samples);
}

RegularizedSolution run_with_noise(const MultiscaleConfig& cfg, const KernelSpec& spec,
                                   std::span<const double> g_obs) {
  MultiscaleSolver solver(spec, cfg.N, cfg.ell, cfg.assembly);
  return solver.run_with_noise(cfg, g_obs);
}

double relative_error(std::span<const double> values, std::span<const double> truth) {
  if (values.size() != truth.size()) throw InputError("relative_error: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    num += (values[i] - truth[i]) * (values[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  if (den == 0.0) throw InputError("relative_error: reference has zero norm");
  return std::sqrt(num / den);
}

double relative_error(const RegularizedSolution& sol, std::span<const double> truth) {
  return relative_error(sol.values, truth);
}

}  // namespace regscale

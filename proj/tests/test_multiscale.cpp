#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "regscale/error.hpp"
#include "regscale/multiscale.hpp"

using namespace regscale;

namespace {

std::vector<double> clean_data(double d, std::size_t N) {
  const Grid g = make_grid(N);
  return forward_data(KernelSpec::gravity(d), SourceSpec::smooth_sine(), g, g);
}

std::vector<double> truth(std::size_t N) {
  const Grid g = make_grid(N);
  std::vector<double> t(N);
  for (std::size_t k = 0; k < N; ++k) t[k] = oracle::smooth_sine(g.midpoints[k]);
  return t;
}

std::vector<double> add_noise(std::vector<double> g, double zeta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double& v : g) v += zeta * nd(rng);
  return g;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("truncated solve on the identity") {
  const auto sys = SpectralSystem::from_spectrum(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0), 1.0);
  const auto sol = solve_truncated(sys, 0.0, 2, make_grid(2));
  CHECK(sol.values[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sol.values[1] == 0.0);
  CHECK(sol.p_used == 2);
  CHECK(sol.lambda_tilde_used == 0.0);

  const auto damped = solve_truncated(sys, 1e12, 2, make_grid(2));
  CHECK(std::abs(damped.values[0]) < 1e-20);

  CHECK_THROWS_AS(solve_truncated(sys, 0.0, 3, make_grid(2)), InputError);
  CHECK_THROWS_AS(solve_truncated(sys, 0.0, 2, make_grid(3)), InputError);
  CHECK_THROWS_AS(solve_truncated(sys, -1.0, 2, make_grid(2)), InputError);
}

TEST_CASE("truncated solve with p = n is the Tikhonov solution") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  const std::size_t n = 15;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, j) = nd(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = nd(rng);
  const double lam = 0.4;
  const Eigen::VectorXd x =
      (A.transpose() * A + lam * lam * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(A.transpose() * b);
  const Grid g = make_grid(n);
  const auto sol = solve_truncated(decompose(A, b), lam, n, g);
  for (std::size_t k = 0; k < n; ++k)
    CHECK(sol.values[k] == doctest::Approx(x[static_cast<Eigen::Index>(k)] / std::sqrt(g.ds)).epsilon(1e-11));
}

TEST_CASE("filter-scale equivalence and linearity of the truncated solve") {
  const std::size_t n = 40;
  const Grid g = make_grid(n);
  const auto A = build_matrix(KernelSpec::gravity(0.25), g, g, Assembly::Midpoint);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Eigen::VectorXd b(n), c(n);
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    b[i] = nd(rng);
    c[i] = nd(rng);
  }
  const auto sys = decompose(A, b);
  const double ds = g.ds;
  const auto scaled = SpectralSystem::from_spectrum(sys.sigma() / std::sqrt(ds), sys.beta() / std::sqrt(ds),
                                                    sys.b_norm_sq() / ds, sys.V());
  const double lam = 0.8;
  const auto lhs = solve_truncated(scaled, lam, 20, g);
  const auto rhs = solve_truncated(sys, std::sqrt(ds) * lam, 20, g);
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(lhs.values[k] - rhs.values[k]) <= 1e-12 * std::abs(rhs.values[k]) + 1e-14);

  const auto sb = solve_truncated(decompose(A, b), 0.01, 15, g);
  const auto sc = solve_truncated(decompose(A, c), 0.01, 15, g);
  const auto sbc = solve_truncated(decompose(A, 2.0 * b - 3.0 * c), 0.01, 15, g);
  for (std::size_t k = 0; k < n; ++k)
    CHECK(sbc.values[k] == doctest::Approx(2.0 * sb.values[k] - 3.0 * sc.values[k]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("round trip pins the 1/sqrt(dt) reconstruction") {
  const std::size_t n = 100;
  const Grid g = make_grid(n);
  const auto A = build_matrix(KernelSpec::gravity(0.5), g, g, Assembly::Exact);
  Eigen::VectorXd x(n);
  const auto f_true = truth(n);
  for (std::size_t j = 0; j < n; ++j) x[static_cast<Eigen::Index>(j)] = f_true[j] * std::sqrt(g.ds);
  const auto sys = decompose(A, A * x);
  const std::size_t p = numerical_rank(sys.sigma_span(sys.k()), 1e-10);
  const auto sol = solve_truncated(sys, 0.0, p, g);
  const double err = relative_error(sol, f_true);
  CHECK(err < 1e-5);
  // The 1/dt variant is off by a factor sqrt(n).
  std::vector<double> alt(sol.values);
  for (double& v : alt) v /= std::sqrt(g.ds);
  CHECK(relative_error(alt, f_true) > 1.0);
}

TEST_CASE("relative error") {
  const std::vector<double> t{1.0, -2.0, 2.0};
  CHECK(relative_error(t, t) == 0.0);
  CHECK(relative_error(std::vector<double>{2.0, -4.0, 4.0}, t) == doctest::Approx(1.0));
  CHECK(relative_error(std::vector<double>{0.0, 0.0, 0.0}, t) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_error(t, std::vector<double>{0.0, 0.0, 0.0}), InputError);
  CHECK_THROWS_AS(relative_error(t, std::vector<double>{1.0}), InputError);
}

TEST_CASE("configuration errors") {
  const auto spec = KernelSpec::gravity(0.25);
  const auto g = clean_data(0.25, 60);
  MultiscaleConfig cfg;
  cfg.N = 60;
  cfg.ell = 7;
  CHECK_THROWS_AS(run_noise_free(cfg, spec, g), InputError);
  cfg.ell = 60;
  CHECK_THROWS_AS(run_noise_free(cfg, spec, g), InputError);
  cfg.ell = 3;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(run_noise_free(cfg, spec, g), InputError);
  cfg.epsilon = 1e6;
  CHECK_THROWS_AS(run_noise_free(cfg, spec, g), NumericError);
  cfg.epsilon = 1e-5;
  cfg.noise_mode = NoiseMode::white(0.0);
  CHECK_THROWS_AS(run_with_noise(cfg, spec, g), InputError);
  cfg.noise_mode = NoiseMode::white(-1.0);
  CHECK_THROWS_AS(run_with_noise(cfg, spec, g), InputError);
  cfg.noise_mode = NoiseMode::noise_free();
  CHECK_THROWS_AS(run_noise_free(cfg, spec, std::vector<double>(59, 1.0)), InputError);
}

TEST_CASE("zero data gives the zero solution") {
  MultiscaleConfig cfg;
  cfg.N = 90;
  cfg.ell = 3;
  cfg.method = Method::GCV;
  const auto sol = run_noise_free(cfg, KernelSpec::gravity(0.25), std::vector<double>(90, 0.0));
  REQUIRE(sol.values.size() == 90);
  for (double v : sol.values) CHECK(v == 0.0);
}

TEST_CASE("ell = 1 reduces to the single-scale pipeline") {
  const std::size_t N = 120;
  const auto spec = KernelSpec::gravity(0.25);
  const auto g_obs = add_noise(clean_data(0.25, N), 0.01 * 6.75, 3);
  const Grid grid = make_grid(N);
  for (Method m : {Method::MDP, Method::ADP, Method::UPRE, Method::GCV}) {
    MultiscaleConfig cfg;
    cfg.N = N;
    cfg.ell = 1;
    cfg.method = m;
    cfg.epsilon = 1e-5;

    const auto nf = run_noise_free(cfg, spec, g_obs);
    const auto A = build_matrix(spec, grid, grid, Assembly::Midpoint);
    const auto sys = decompose(A, data_coefficients(g_obs, grid.ds));
    const std::size_t p = numerical_rank(sys.sigma_span(sys.k()), cfg.epsilon);
    SearchConfig sc;
    sc.lambda_grid = default_lambda_grid(sys.sigma_span(sys.k()), p);
    const auto est = estimate_lambda(m, sys, p, sc, N, grid.ds);
    const auto direct = solve_truncated(sys, est.lambda, p, grid);
    CHECK(nf.p_used == p);
    CHECK(nf.lambda_tilde_used == doctest::Approx(est.lambda).epsilon(1e-12));
    CHECK(relative_error(nf.values, direct.values) < 1e-10);

    cfg.noise_mode = NoiseMode::white(0.0675);
    const auto wn = run_with_noise(cfg, spec, g_obs);
    std::vector<double> gw(g_obs);
    for (double& v : gw) v /= 0.0675;
    const auto wsys = decompose(A, data_coefficients(gw, grid.ds));
    sc.zeta_sq = grid.ds;
    const auto west = estimate_lambda_tilde(m, wsys, p, sc, N, grid.ds);
    auto wdirect = solve_truncated(wsys, west.lambda_tilde, p, grid);
    for (double& v : wdirect.values) v *= 0.0675;
    CHECK(wn.lambda_tilde_used == doctest::Approx(west.lambda_tilde).epsilon(1e-12));
    CHECK(relative_error(wn.values, wdirect.values) < 1e-10);
  }
}

TEST_CASE("whitening cancels a common scale of data and noise level") {
  const std::size_t N = 300;
  const auto spec = KernelSpec::gravity(0.25);
  const double zeta = 0.001 * 6.7541;
  const auto g_obs = add_noise(clean_data(0.25, N), zeta, 9);
  MultiscaleSolver solver(spec, N, 3, Assembly::Midpoint);
  // A power of two scales exactly, so the whitened data are bitwise equal.
  // Any other factor perturbs them by an ulp, which the argmin amplifies.
  for (const auto [c, tol] : {std::pair{32.0, 1e-12}, std::pair{37.5, 1e-5}}) {
    for (Method m : {Method::MDP, Method::ADP, Method::UPRE, Method::GCV}) {
      MultiscaleConfig cfg;
      cfg.N = N;
      cfg.ell = 3;
      cfg.method = m;
      cfg.noise_mode = NoiseMode::white(zeta);
      const auto a = solver.run(cfg, g_obs);
      std::vector<double> scaled(g_obs);
      for (double& v : scaled) v *= c;
      cfg.noise_mode = NoiseMode::white(c * zeta);
      const auto b = solver.run(cfg, scaled);
      CHECK(b.lambda_tilde_used == doctest::Approx(a.lambda_tilde_used).epsilon(tol));
      std::vector<double> wa(a.values), wb(b.values);
      for (double& v : wa) v /= zeta;
      for (double& v : wb) v /= c * zeta;
      CHECK(relative_error(wb, wa) <= tol);
    }
  }
}

TEST_CASE("noise-free multiscale GCV at N = 3000, n = 1000") {
  const std::size_t N = 3000;
  MultiscaleConfig cfg;
  cfg.N = N;
  cfg.ell = 3;
  cfg.method = Method::GCV;
  cfg.epsilon = 1e-5;
  const auto sol = run_noise_free(cfg, KernelSpec::gravity(0.25), clean_data(0.25, N));
  CHECK(sol.values.size() == N);
  CHECK(sol.estimate.lambda > 0.0);
  CHECK(relative_error(sol, truth(N)) < 0.05);
}

TEST_CASE("lambda tilde is stable across coarse resolutions") {
  const std::size_t N = 3000;
  const auto spec = KernelSpec::gravity(0.25);
  const auto clean = clean_data(0.25, N);
  const double zeta = 0.001 * *std::max_element(clean.begin(), clean.end());
  MultiscaleSolver s1000(spec, N, 3, Assembly::Midpoint);
  MultiscaleSolver s500(spec, N, 6, Assembly::Midpoint);
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g_obs = add_noise(clean, zeta, seed);
    MultiscaleConfig cfg;
    cfg.N = N;
    cfg.method = Method::UPRE;
    cfg.noise_mode = NoiseMode::white(zeta);
    cfg.ell = 3;
    const auto a = s1000.run(cfg, g_obs);
    if (!s500.cached_fine_factors()) s500.set_fine_factors(s1000.cached_fine_factors());
    cfg.ell = 6;
    const auto b = s500.run(cfg, g_obs);
    ratios.push_back(a.lambda_tilde_used / b.lambda_tilde_used);
  }
  const double r = median(ratios);
  CHECK(r < 2.0);
  CHECK(r > 0.5);
}

TEST_CASE("fine factors are reused across ranks") {
  MultiscaleSolver solver(KernelSpec::gravity(0.25), 300, 3, Assembly::Midpoint);
  const auto f1 = solver.fine_factors(5);
  const auto f2 = solver.fine_factors(20);
  CHECK(f1 == f2);
  CHECK(f1->sigma.size() >= 20);
  CHECK_THROWS_AS(solver.set_fine_factors(factorize(Eigen::MatrixXd::Identity(4, 4))), InputError);
}

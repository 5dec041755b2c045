#include <cmath>
#include <random>

#include "doctest.h"
#include "regscale/error.hpp"
#include "regscale/galerkin.hpp"
#include "regscale/regparam.hpp"

using namespace regscale;

namespace {

SpectralSystem random_system(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, j) = nd(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = nd(rng);
  return decompose(A, b);
}

SearchConfig config(std::vector<double> grid, double zeta_sq = 1.0) {
  SearchConfig c;
  c.lambda_grid = std::move(grid);
  c.zeta_sq = zeta_sq;
  return c;
}

struct NoisySystem {
  SpectralSystem sys;
  double zeta_sq = 1.0;  // noise variance of each beta_i
};

// Gravity system at n = 100 with noise nu * max(g).
NoisySystem gravity_system(double nu, std::uint64_t seed) {
  const std::size_t n = 100;
  const Grid g = make_grid(n);
  const auto spec = KernelSpec::gravity(0.25);
  auto samples = forward_data(spec, SourceSpec::smooth_sine(), g, make_grid(3000));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const double gmax = *std::max_element(samples.begin(), samples.end());
  for (double& v : samples) v += nu * gmax * nd(rng);
  const double zeta = nu * gmax;
  return {decompose(build_matrix(spec, g, g, Assembly::Midpoint), data_coefficients(samples, g.ds)),
          nu > 0.0 ? zeta * zeta * g.ds : 1.0};
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("upre") == Method::UPRE);
  CHECK(parse_method("Gcv") == Method::GCV);
  CHECK(parse_method("MDP") == Method::MDP);
  CHECK(parse_method("adp") == Method::ADP);
  CHECK(method_name(Method::ADP) == "ADP");
  CHECK_THROWS_AS(parse_method("lcurve"), InputError);
}

TEST_CASE("filter factor") {
  CHECK(filter_factor(0.0, 3.0) == 1.0);
  CHECK(filter_factor(1.0, 1.0) == 0.5);
  CHECK(filter_factor(2.0, 1.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(filter_factor(1.0, 0.0), InputError);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double lam = std::pow(10.0, u(rng));
    const double sig = std::pow(10.0, u(rng));
    const double q = filter_factor(lam, sig);
    CHECK(q > 0.0);
    CHECK(q <= 1.0);
    CHECK(1.0 - q == doctest::Approx(lam * lam / (lam * lam + sig * sig)).epsilon(1e-10));
  }
}

TEST_CASE("filter equivalence across grid scalings") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> uds(-5.0, 0.0);
  for (int k = 0; k < 1000; ++k) {
    const double lam = std::pow(10.0, u(rng));
    const double sig = std::pow(10.0, u(rng));
    const double ds = std::pow(10.0, uds(rng));
    const double lhs = filter_factor(lam, sig / std::sqrt(ds));
    const double rhs = filter_factor(std::sqrt(ds) * lam, sig);
    CHECK(std::abs(lhs - rhs) <= 1e-14 * std::abs(rhs));
  }
}

TEST_CASE("eta") {
  const std::vector<double> a{1.0};
  const std::vector<double> z{2.0};
  CHECK(eta(1.0, 1, 2, a, z) == doctest::Approx(1.0));
  CHECK(eta(0.0, 1, 1, a, z) == 0.0);
  const std::vector<double> a3{3.0, 2.0, 0.5};
  const std::vector<double> z3{1.0, -2.0, 4.0};
  CHECK(eta(1e8 * 3.0, 3, 1, a3, z3) == doctest::Approx(21.0).epsilon(1e-6));
  CHECK(eta(1e8 * 3.0, 2, 2, a3, z3) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK_THROWS_AS(eta(1.0, 4, 1, a3, z3), InputError);
  CHECK_THROWS_AS(eta(1.0, 1, 3, a3, z3), InputError);
  CHECK_THROWS_AS(eta(1.0, 1, 1, a3, z), InputError);
  CHECK_THROWS_AS(eta(1.0, 2, 1, std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 1.0}), InputError);
}

TEST_CASE("functional limits") {
  const auto sys = SpectralSystem::from_spectrum(Eigen::Vector3d(3, 2, 1), Eigen::Vector3d(1, -2, 0.5), 10.0);
  const auto cfg = config({1.0, 2.0});
  CHECK(functional_value(Method::ADP, 0.0, sys, 3, cfg, 3) == 0.0);
  CHECK(functional_value(Method::MDP, 0.0, sys, 3, cfg, 3) == 0.0);
  CHECK(functional_value(Method::ADP, 1e9, sys, 3, cfg, 3) == doctest::Approx(5.25).epsilon(1e-9));
  CHECK(functional_value(Method::ADP, 1e9, sys, 2, cfg, 3) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK_THROWS_AS(functional_value(Method::UPRE, 1.0, sys, 4, cfg, 3), InputError);
  CHECK_THROWS_AS(functional_value(Method::GCV, 1.0, sys, 3, cfg, 2), InputError);
}

TEST_CASE("UPRE on a one-term system matches direct summation") {
  const auto sys = SpectralSystem::from_spectrum(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 1.0);
  const auto cfg = config({1.0, 2.0}, 0.25);
  for (const double lam : log_grid(1e-4, 1e4, 501)) {
    const double q = 1.0 / (lam * lam + 1.0);
    const double direct = (1.0 - q) * (1.0 - q) + 2.0 * 0.25 * q;
    CHECK(std::abs(functional_value(Method::UPRE, lam, sys, 1, cfg, 1) - direct) <= 1e-12 * direct);
  }
}

TEST_CASE("functionals agree with dense-matrix evaluation") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  const std::size_t n = 20;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, j) = nd(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = nd(rng);
  const auto sys = decompose(A, b);
  const auto& f = sys.factors();
  const double zeta_sq = 0.3;
  const auto cfg = config({1.0, 2.0}, zeta_sq);
  for (std::size_t p : {5, 12, 20}) {
    const auto P = static_cast<Eigen::Index>(p);
    for (double lam : {0.05, 0.7, 3.0}) {
      // Regularized inverse restricted to the first p triplets.
      Eigen::VectorXd w(P);
      for (Eigen::Index i = 0; i < P; ++i) w[i] = f.sigma[i] / (f.sigma[i] * f.sigma[i] + lam * lam);
      const Eigen::MatrixXd Ainv = f.V.leftCols(P) * w.asDiagonal() * f.U.leftCols(P).transpose();
      const Eigen::MatrixXd H = A * Ainv;
      const Eigen::VectorXd r = A * (Ainv * b) - b;
      const Eigen::MatrixXd Up = f.U.leftCols(P);
      const double head = (Up.transpose() * r).squaredNorm();
      const double upre = head + 2.0 * zeta_sq * H.trace();
      const double gcv = n * n * r.squaredNorm() / std::pow(n - H.trace(), 2);
      CHECK(functional_value(Method::UPRE, lam, sys, p, cfg, n) == doctest::Approx(upre).epsilon(1e-10));
      CHECK(functional_value(Method::GCV, lam, sys, p, cfg, n) == doctest::Approx(gcv).epsilon(1e-10));
      CHECK(functional_value(Method::MDP, lam, sys, p, cfg, n) == doctest::Approx(head).epsilon(1e-10));
    }
  }
}

TEST_CASE("GCV tail identity on random systems") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> un(2, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = un(rng);
    const auto sys = random_system(n, rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    double head = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double b = sys.beta()[static_cast<Eigen::Index>(i)];
      (i < p ? head : tail) += b * b;
    }
    const double identity = sys.b_norm_sq() - head;
    CHECK(std::abs(identity - tail) <= 1e-12 * sys.b_norm_sq());
    if (tail > 1e-2 * sys.b_norm_sq()) CHECK(std::abs(identity - tail) <= 1e-12 * tail);
  }
}

TEST_CASE("discrepancy functionals are nondecreasing in lambda") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = random_system(15, rng);
    const auto cfg = config({1.0, 2.0});
    double prev_d = -1.0;
    double prev_c = -1.0;
    for (double lam : log_grid(1e-4, 1e4, 300)) {
      const double d = functional_value(Method::MDP, lam, sys, 15, cfg, 15);
      const double c = functional_value(Method::ADP, lam, sys, 15, cfg, 15);
      CHECK(d >= prev_d * (1.0 - 1e-14));
      CHECK(c >= prev_c * (1.0 - 1e-14));
      prev_d = d;
      prev_c = c;
    }
  }
}

TEST_CASE("grids") {
  const auto g = log_grid(1e-2, 1e2, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(1e2));
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), InputError);
  CHECK_THROWS_AS(log_grid(2.0, 1.0, 5), InputError);
  CHECK_THROWS_AS(log_grid(1.0, 2.0, 1), InputError);
  const std::vector<double> sigma{10.0, 1.0, 0.1};
  const auto d = default_lambda_grid(sigma, 2);
  CHECK(d.size() == 200);
  CHECK(d.front() == doctest::Approx(1e-2));
  CHECK(d.back() == doctest::Approx(1e3));
  CHECK_THROWS_AS(default_lambda_grid(sigma, 0), InputError);
  CHECK_THROWS_AS(default_lambda_grid(sigma, 4), InputError);
}

TEST_CASE("MDP on one term solves the discrepancy equation") {
  const auto sys = SpectralSystem::from_spectrum(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 1.0);
  const auto est = estimate_lambda(Method::MDP, sys, 1, config(log_grid(1e-3, 1e3, 200), 0.25), 1, 1.0);
  CHECK(est.lambda == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(est.functional_at_min < 1e-9);
  CHECK_FALSE(est.grid_hit_boundary);
}

TEST_CASE("UPRE without noise runs to the small-lambda boundary") {
  std::mt19937_64 rng(4);
  const auto sys = random_system(10, rng);
  const auto grid = log_grid(1e-3, 1e2, 100);
  const auto est = estimate_lambda(Method::UPRE, sys, 10, config(grid, 0.0), 10, 0.1);
  CHECK(est.grid_hit_boundary);
  CHECK(est.lambda <= grid[1]);
}

TEST_CASE("ties resolve to the smallest lambda") {
  const auto sys = SpectralSystem::from_spectrum(Eigen::Vector2d(2, 1), Eigen::Vector2d(0, 0), 0.0);
  const auto grid = log_grid(1e-3, 1e3, 50);
  auto cfg = config(grid);
  cfg.refine_iters = 0;
  for (Method m : {Method::MDP, Method::ADP, Method::GCV}) {
    const auto est = estimate_lambda(m, sys, 2, cfg, 4, 1.0);
    CHECK(est.lambda == grid.front());
  }
}

TEST_CASE("estimate errors and scaling") {
  const auto sys = SpectralSystem::from_spectrum(Eigen::Vector2d(2, 1), Eigen::Vector2d(1, 1), 2.0);
  CHECK_THROWS_AS(estimate_lambda(Method::GCV, sys, 2, config({}), 2, 0.1), InputError);
  CHECK_THROWS_AS(estimate_lambda(Method::GCV, sys, 2, config({1.0}), 2, 0.1), InputError);
  CHECK_THROWS_AS(estimate_lambda(Method::GCV, sys, 2, config({2.0, 1.0}), 2, 0.1), InputError);
  CHECK_THROWS_AS(estimate_lambda(Method::GCV, sys, 0, config({1.0, 2.0}), 2, 0.1), InputError);
  CHECK_THROWS_AS(estimate_lambda(Method::GCV, sys, 3, config({1.0, 2.0}), 2, 0.1), InputError);
  CHECK_THROWS_AS(estimate_lambda(Method::UPRE, sys, 2, config({1.0, 2.0}, -1.0), 2, 0.1), InputError);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-4.0, 0.0);
  for (int k = 0; k < 50; ++k) {
    const double ds = std::pow(10.0, u(rng));
    for (Method m : {Method::MDP, Method::ADP, Method::UPRE, Method::GCV}) {
      const auto e1 = estimate_lambda(m, sys, 2, config(log_grid(1e-3, 1e3, 60), 0.1), 4, ds);
      CHECK(std::abs(e1.lambda_tilde - std::sqrt(ds) * e1.lambda) <= 1e-14 * e1.lambda_tilde);
      const auto e2 = estimate_lambda_tilde(m, sys, 2, config(log_grid(1e-3, 1e3, 60), 0.1), 4, ds);
      CHECK(std::abs(e2.lambda_tilde - std::sqrt(ds) * e2.lambda) <= 1e-14 * e2.lambda_tilde);
      CHECK(e2.lambda_tilde == e1.lambda);
    }
  }

  CHECK(scale_lambda(10.0, 0.01) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scale_lambda(3.7, 1.0) == 3.7);
  CHECK(unscale_lambda(scale_lambda(3.7, 0.003), 0.003) == doctest::Approx(3.7).epsilon(1e-14));
  CHECK_THROWS_AS(scale_lambda(1.0, 0.0), InputError);
}

TEST_CASE("refined estimate matches a dense brute-force argmin") {
  for (double nu : {0.0, 0.01}) {
    const auto [sys, zeta_sq] = gravity_system(nu, 5);
    const std::size_t n = sys.n();
    const std::size_t p = numerical_rank(sys.sigma_span(sys.k()), 1e-5);
    const double ds = 1.0 / static_cast<double>(n);
    const auto cfg = config(default_lambda_grid(sys.sigma_span(sys.k()), p), zeta_sq);
    for (Method m : {Method::MDP, Method::ADP, Method::UPRE, Method::GCV}) {
      if (nu == 0.0 && m != Method::GCV) continue;
      const auto est = estimate_lambda(m, sys, p, cfg, n, ds);
      const auto dense = log_grid(cfg.lambda_grid.front(), cfg.lambda_grid.back(), 10000);
      double best = dense[0];
      double best_val = search_objective(m, best, sys, p, cfg, n);
      for (double l : dense) {
        const double v = search_objective(m, l, sys, p, cfg, n);
        if (v < best_val) {
          best_val = v;
          best = l;
        }
      }
      CHECK(std::abs(std::log10(est.lambda / best)) <= est.grid_cell_log10);
      CHECK(est.functional_at_min <= best_val + 1e-9 * std::abs(best_val));
    }
  }
}

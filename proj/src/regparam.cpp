#include "regscale/regparam.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "regscale/error.hpp"
#include "regscale/simd.hpp"

namespace regscale {
namespace {

void check_p(const SpectralSystem& sys, std::size_t p) {
  if (p > sys.k()) throw InputError("rank p exceeds the number of computed singular triplets");
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw InputError("lambda grid needs at least two points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw InputError("lambda grid must be positive and finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("lambda grid must be strictly ascending");
  }
}

struct SearchResult {
  double arg = 0.0;
  double value = 0.0;
  bool boundary = false;
  double cell_log10 = 0.0;
  double bracket_log10 = 0.0;
};

template <class F>
SearchResult grid_then_golden(const std::vector<double>& grid, std::size_t iters, F&& objective) {
  check_grid(grid);
  std::size_t best = 0;
  double best_val = objective(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = objective(grid[i]);
    if (v < best_val) {  // strict: ties stay with the smaller lambda
      best_val = v;
      best = i;
    }
  }
  SearchResult r;
  r.arg = grid[best];
  r.value = best_val;
  r.boundary = best == 0 || best + 1 == grid.size();
  const std::size_t lo_i = best == 0 ? 0 : best - 1;
  const std::size_t hi_i = std::min(best + 1, grid.size() - 1);
  const std::size_t cell_hi = best + 1 < grid.size() ? best + 1 : best;
  const std::size_t cell_lo = cell_hi == 0 ? 0 : cell_hi - 1;
  r.cell_log10 = std::log10(grid[cell_hi] / grid[cell_lo]);

  double a = std::log(grid[lo_i]);
  double b = std::log(grid[hi_i]);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = objective(std::exp(c));
  double fd = objective(std::exp(d));
  for (std::size_t it = 0; it < iters; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = objective(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = objective(std::exp(d));
    }
  }
  r.bracket_log10 = (b - a) / std::log(10.0);
  const double cand = fc <= fd ? c : d;
  const double cand_val = std::min(fc, fd);
  if (cand_val < r.value) {
    r.arg = std::exp(cand);
    r.value = cand_val;
  }
  return r;
}

LambdaEstimate run_search(Method method, const SpectralSystem& sys, std::size_t p, const SearchConfig& cfg,
                          std::size_t N) {
  if (p == 0) throw InputError("lambda search needs rank p >= 1");
  check_p(sys, p);
  if (!(cfg.zeta_sq >= 0.0) || !(cfg.tau > 0.0)) throw InputError("search needs zeta_sq >= 0 and tau > 0");
  const auto res = grid_then_golden(cfg.lambda_grid, cfg.refine_iters,
                                    [&](double l) { return search_objective(method, l, sys, p, cfg, N); });
  LambdaEstimate est;
  est.method = method;
  est.p = p;
  est.functional_at_min = res.value;
  est.grid_hit_boundary = res.boundary;
  est.grid_cell_log10 = res.cell_log10;
  est.bracket_log10 = res.bracket_log10;
  est.lambda = res.arg;
  return est;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::MDP: return "MDP";
    case Method::ADP: return "ADP";
    case Method::UPRE: return "UPRE";
    case Method::GCV: return "GCV";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (up == "MDP") return Method::MDP;
  if (up == "ADP") return Method::ADP;
  if (up == "UPRE") return Method::UPRE;
  if (up == "GCV") return Method::GCV;
  throw InputError("unknown method: " + std::string(name));
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InputError("log_grid needs 0 < lo < hi and count >= 2");
  std::vector<double> g(count);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> default_lambda_grid(std::span<const double> sigma, std::size_t p, std::size_t count) {
  if (p == 0 || p > sigma.size()) throw InputError("default_lambda_grid: p out of range");
  return log_grid(sigma[p - 1] * 1e-2, sigma[0] * 1e2, count);
}

double filter_factor(double lambda, double sigma) {
  if (!(sigma > 0.0)) throw InputError("filter_factor: sigma must be positive");
  const double s2 = sigma * sigma;
  return s2 / (lambda * lambda + s2);
}

double eta(double lambda, std::size_t p, int k, std::span<const double> a, std::span<const double> z) {
  if (a.size() != z.size()) throw InputError("eta: a and z differ in length");
  if (p > a.size()) throw InputError("eta: p out of range");
  if (k != 1 && k != 2) throw InputError("eta: k must be 1 or 2");
  for (std::size_t i = 1; i < a.size(); ++i)
    if (a[i] > a[i - 1]) throw InputError("eta: a must be nonincreasing");
  const auto sums = simd::filter_sums(lambda, a.first(p), z.first(p));
  return k == 1 ? sums.eta1 : sums.eta2;
}

double functional_value(Method method, double lambda, const SpectralSystem& sys, std::size_t p,
                        const SearchConfig& cfg, std::size_t N) {
  check_p(sys, p);
  const auto sums = simd::filter_sums(lambda, sys.sigma_span(p), sys.beta_span(p));
  switch (method) {
    case Method::MDP: return sums.eta2;
    case Method::ADP: return sums.eta1;
    case Method::UPRE: return sums.eta2 + 2.0 * cfg.zeta_sq * sums.qsum;
    case Method::GCV: {
      if (N < p) throw InputError("GCV needs N >= p");
      const auto head = sys.beta_span(p);
      double captured = 0.0;
      for (double b : head) captured += b * b;
      const double tail = std::max(0.0, sys.b_norm_sq() - captured);
      const double nn = static_cast<double>(N);
      const double denom = nn - sums.qsum;
      if (!(denom > 0.0)) throw NumericError("GCV denominator vanished");
      return nn * nn * (sums.eta2 + tail) / (denom * denom);
    }
  }
  return 0.0;
}

double search_objective(Method method, double lambda, const SpectralSystem& sys, std::size_t p,
                        const SearchConfig& cfg, std::size_t N) {
  const double v = functional_value(method, lambda, sys, p, cfg, N);
  const double pp = static_cast<double>(p);
  switch (method) {
    case Method::MDP: return std::abs(v - cfg.zeta_sq * cfg.tau * pp);
    case Method::ADP: return std::abs(v - cfg.zeta_sq * pp);
    default: return v;
  }
}

LambdaEstimate estimate_lambda(Method method, const SpectralSystem& sys, std::size_t p, const SearchConfig& cfg,
                               std::size_t N, double ds) {
  LambdaEstimate est = run_search(method, sys, p, cfg, N);
  est.lambda_tilde = scale_lambda(est.lambda, ds);
  return est;
}

LambdaEstimate estimate_lambda_tilde(Method method, const SpectralSystem& sys, std::size_t p,
                                     const SearchConfig& cfg, std::size_t N, double ds) {
  LambdaEstimate est = run_search(method, sys, p, cfg, N);
  est.lambda_tilde = est.lambda;
  est.lambda = unscale_lambda(est.lambda_tilde, ds);
  return est;
}

double scale_lambda(double lambda, double ds) {
  if (!(ds > 0.0)) throw InputError("scale_lambda: ds must be positive");
  return std::sqrt(ds) * lambda;
}

double unscale_lambda(double lambda_tilde, double ds) {
  if (!(ds > 0.0)) throw InputError("unscale_lambda: ds must be positive");
  return lambda_tilde / std::sqrt(ds);
}

}  // namespace regscale

#include "regscale/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "regscale/error.hpp"
#include "regscale/galerkin.hpp"
#include "regscale/regparam.hpp"
#include "regscale/spectral.hpp"

namespace regscale {

namespace {

using nlohmann::json;

template <class E>
[[noreturn]] void rethrow_as(const std::string& context, const E& e) {
  throw E(context + ": " + e.what());
}

// Re-raise component errors with the cell that produced them.
template <class F>
auto with_context(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError& e) {
    rethrow_as(context, e);
  } catch (const UnsupportedError& e) {
    rethrow_as(context, e);
  } catch (const NumericError& e) {
    rethrow_as(context, e);
  } catch (const IoError& e) {
    rethrow_as(context, e);
  }
}

std::string cell_name(std::size_t n, Method m, double eps) {
  std::ostringstream os;
  os << "n=" << n << ", method=" << method_name(m) << ", epsilon=" << eps;
  return os.str();
}

template <class T>
T read_key(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

SourceSpec parse_source(const json& j) {
  std::string family = j.is_string() ? j.get<std::string>() : read_key<std::string>(j, "family");
  std::transform(family.begin(), family.end(), family.begin(), [](unsigned char c) { return std::tolower(c); });
  if (family == "smooth_sine" || family == "smoothsine") return SourceSpec::smooth_sine();
  if (family == "piecewise_constant" || family == "piecewiseconstant") {
    PiecewiseConstant pc;
    if (j.is_object() && j.contains("breakpoints")) pc.breakpoints = read_key<std::vector<double>>(j, "breakpoints");
    if (j.is_object() && j.contains("levels")) pc.levels = read_key<std::vector<double>>(j, "levels");
    return SourceSpec::piecewise_constant(pc);
  }
  throw InputError("config key 'source': unknown source '" + family + "'");
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.kernel_family != "gravity")
    throw UnsupportedError("config key 'kernel.family': only 'gravity' can be configured from a file");
  if (!(cfg.d > 0.0) || !std::isfinite(cfg.d)) throw InputError("config key 'kernel.d': depth must be positive");
  if (cfg.N < 2) throw InputError("config key 'N': must be at least 2");
  for (std::size_t n : cfg.resolutions)
    if (n < 2 || n > cfg.N || cfg.N % n != 0)
      throw InputError("config key 'resolutions': n = " + std::to_string(n) + " does not divide N = " +
                       std::to_string(cfg.N));
  for (double e : cfg.epsilon_list)
    if (!(e > 0.0)) throw InputError("config key 'epsilon_list': precisions must be positive");
  if (!(cfg.noise.nu >= 0.0) || !std::isfinite(cfg.noise.nu))
    throw InputError("config key 'noise.nu': must be nonnegative");
  if (cfg.grid_points < 2) throw InputError("config key 'grid_points': need at least 2");
  if (!(cfg.tau > 0.0)) throw InputError("config key 'tau': must be positive");
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config: top level must be an object");

  static const char* known[] = {"kernel", "source", "N", "resolutions", "methods", "epsilon_list", "noise",
                                "output_dir", "assembly", "grid_points", "refine_iters", "tau"};
  for (const auto& item : j.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return item.key() == k; }) ==
        std::end(known))
      throw InputError("config: unknown key '" + item.key() + "'");

  ExperimentConfig cfg;
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    if (k.contains("family")) cfg.kernel_family = read_key<std::string>(k, "family");
    if (k.contains("d")) cfg.d = read_key<double>(k, "d");
  }
  if (j.contains("source")) cfg.source = parse_source(j["source"]);
  if (j.contains("N")) cfg.N = read_key<std::size_t>(j, "N");
  if (j.contains("resolutions")) cfg.resolutions = read_key<std::vector<std::size_t>>(j, "resolutions");
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : read_key<std::vector<std::string>>(j, "methods")) cfg.methods.push_back(parse_method(m));
  }
  if (j.contains("epsilon_list")) cfg.epsilon_list = read_key<std::vector<double>>(j, "epsilon_list");
  if (j.contains("noise")) {
    const json& n = j["noise"];
    if (n.contains("nu")) cfg.noise.nu = read_key<double>(n, "nu");
    if (n.contains("seeds")) cfg.noise.seeds = read_key<std::vector<std::uint64_t>>(n, "seeds");
  }
  if (j.contains("output_dir")) cfg.output_dir = read_key<std::string>(j, "output_dir");
  if (j.contains("assembly")) cfg.assembly = parse_assembly(read_key<std::string>(j, "assembly"));
  if (j.contains("grid_points")) cfg.grid_points = read_key<std::size_t>(j, "grid_points");
  if (j.contains("refine_iters")) cfg.refine_iters = read_key<std::size_t>(j, "refine_iters");
  if (j.contains("tau")) cfg.tau = read_key<double>(j, "tau");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

KernelSpec kernel_spec(const ExperimentConfig& cfg) {
  validate(cfg);
  return KernelSpec::gravity(cfg.d);
}

NoisyData gen_noise(const std::vector<double>& g_clean, double nu, std::uint64_t seed) {
  if (!(nu >= 0.0)) throw InputError("gen_noise: nu must be nonnegative");
  NoisyData out{g_clean, 0.0};
  if (nu == 0.0 || g_clean.empty()) return out;
  out.zeta_e = nu * *std::max_element(g_clean.begin(), g_clean.end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.g) v += out.zeta_e * normal(rng);
  return out;
}

Experiment::Experiment(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), spec_(kernel_spec(cfg_)), fine_grid_(make_grid(cfg_.N)) {
  g_clean_ = forward_data(spec_, cfg_.source, fine_grid_, fine_grid_);
  truth_.resize(fine_grid_.n);
  for (std::size_t k = 0; k < fine_grid_.n; ++k) truth_[k] = source_eval(cfg_.source, fine_grid_.midpoints[k]);
}

double Experiment::max_g() const { return *std::max_element(g_clean_.begin(), g_clean_.end()); }

const NoisyData& Experiment::data(std::uint64_t seed) {
  auto it = noisy_.find(seed);
  if (it == noisy_.end()) it = noisy_.emplace(seed, gen_noise(g_clean_, cfg_.noise.nu, seed)).first;
  return it->second;
}

MultiscaleSolver& Experiment::solver(std::size_t n) {
  auto it = solvers_.find(n);
  if (it != solvers_.end()) return *it->second;
  if (n < 2 || cfg_.N % n != 0)
    throw InputError("resolution n = " + std::to_string(n) + " does not divide N = " + std::to_string(cfg_.N));
  auto s = std::make_unique<MultiscaleSolver>(spec_, cfg_.N, cfg_.N / n, cfg_.assembly);
  return *solvers_.emplace(n, std::move(s)).first->second;
}

MultiscaleConfig Experiment::cell_config(std::size_t n, Method method, double epsilon, std::uint64_t seed) {
  MultiscaleConfig mc;
  mc.N = cfg_.N;
  mc.ell = cfg_.N / n;
  mc.epsilon = epsilon;
  mc.method = method;
  mc.noise_mode = cfg_.noise.nu > 0.0 ? NoiseMode::white(data(seed).zeta_e) : NoiseMode::noise_free();
  mc.search.refine_iters = cfg_.refine_iters;
  mc.search.tau = cfg_.tau;
  mc.grid_points = cfg_.grid_points;
  mc.assembly = cfg_.assembly;
  return mc;
}

RegularizedSolution Experiment::solve(std::size_t n, Method method, double epsilon, std::uint64_t seed) {
  return with_context(cell_name(n, method, epsilon) + ", seed=" + std::to_string(seed), [&] {
    const MultiscaleConfig mc = cell_config(n, method, epsilon, seed);
    MultiscaleSolver& s = solver(n);
    // All resolutions share the fine operator; hand its dominant triplets around.
    auto size_of = [](const std::shared_ptr<const Factorization>& f) { return f ? f->sigma.size() : 0; };
    if (s.ell() != 1 && size_of(fine_shared_) > size_of(s.cached_fine_factors())) s.set_fine_factors(fine_shared_);
    RegularizedSolution sol = s.run(mc, data(seed).g);
    if (s.ell() != 1 && size_of(s.cached_fine_factors()) > size_of(fine_shared_)) fine_shared_ = s.cached_fine_factors();
    return sol;
  });
}

ErrorRow Experiment::error_row(std::size_t n, Method method, double epsilon, std::uint64_t seed) {
  const RegularizedSolution sol = solve(n, method, epsilon, seed);
  ErrorRow row;
  row.n = n;
  row.method = method;
  row.epsilon = epsilon;
  row.seed = seed;
  row.relative_error = relative_error(sol, truth_);
  row.lambda_tilde = sol.estimate.lambda_tilde;
  row.lambda = sol.estimate.lambda;
  row.p = sol.p_used;
  row.boundary = sol.estimate.grid_hit_boundary;
  row.max_abs_f = max_abs(sol.values);
  return row;
}

std::uint64_t Experiment::diagnostic_seed() const {
  return cfg_.noise.seeds.empty() ? 0 : cfg_.noise.seeds.front();
}

std::filesystem::path Experiment::out_path(const std::string& name) const {
  std::error_code ec;
  std::filesystem::create_directories(cfg_.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg_.output_dir.string() + ": " + ec.message());
  return cfg_.output_dir / name;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::filesystem::path Experiment::write_delta() {
  std::ostringstream os;
  os << "n,assembly,delta_sq,frobenius_sq,norm_sq\n";
  const double norm_sq = kernel_norm_sq(spec_);
  for (std::size_t n : cfg_.resolutions) {
    const Grid grid = make_grid(n);
    for (Assembly a : {Assembly::Midpoint, Assembly::Exact}) {
      with_context("delta, n=" + std::to_string(n), [&] {
        const Eigen::MatrixXd A = build_matrix(spec_, grid, grid, a);
        os << n << ',' << assembly_name(a) << ',' << csv_number(delta_sq(spec_, A)) << ','
           << csv_number(frobenius_sq(A)) << ',' << csv_number(norm_sq) << '\n';
      });
    }
  }
  const auto path = out_path("delta.csv");
  write_file(path, os.str());
  return path;
}

std::filesystem::path Experiment::write_spectrum() {
  std::ostringstream os;
  os << "n,i,sigma_i";
  for (double e : cfg_.epsilon_list) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ",in_rank_eps_%g", e);
    os << buf;
  }
  os << '\n';
  for (std::size_t n : cfg_.resolutions) {
    with_context("spectrum, n=" + std::to_string(n), [&] {
      const auto f = solver(n).coarse_factors();
      for (Eigen::Index i = 0; i < f->sigma.size(); ++i) {
        os << n << ',' << (i + 1) << ',' << csv_number(f->sigma[i]);
        for (double e : cfg_.epsilon_list) os << ',' << (f->sigma[i] > e ? 1 : 0);
        os << '\n';
      }
    });
  }
  const auto path = out_path("spectrum.csv");
  write_file(path, os.str());
  return path;
}

std::filesystem::path Experiment::write_picard() {
  std::ostringstream os;
  os << "n,seed,i,sigma_i,abs_beta_i,ratio\n";
  const std::uint64_t seed = diagnostic_seed();
  for (std::size_t n : cfg_.resolutions) {
    with_context("picard, n=" + std::to_string(n), [&] {
      const SpectralSystem sys = solver(n).coarse_system(data(seed).g);
      for (const PicardRow& r : picard_table(sys))
        os << n << ',' << seed << ',' << r.i << ',' << csv_number(r.sigma) << ',' << csv_number(r.abs_beta) << ','
           << csv_number(r.ratio) << '\n';
    });
  }
  const auto path = out_path("picard.csv");
  write_file(path, os.str());
  return path;
}

std::filesystem::path Experiment::write_functionals() {
  std::ostringstream os;
  os << "n,method,epsilon,lambda_grid_point,value,objective\n";
  const std::uint64_t seed = diagnostic_seed();
  const bool noisy = cfg_.noise.nu > 0.0;
  for (std::size_t n : cfg_.resolutions) {
    for (Method m : cfg_.methods) {
      for (double eps : cfg_.epsilon_list) {
        with_context("functionals, " + cell_name(n, m, eps), [&] {
          MultiscaleSolver& s = solver(n);
          std::vector<double> g = data(seed).g;
          if (noisy)
            for (double& v : g) v /= data(seed).zeta_e;
          const SpectralSystem sys = s.coarse_system(g);
          const std::size_t p = numerical_rank(sys.sigma_span(sys.k()), eps);
          if (p == 0) throw NumericError("numerical rank is zero");
          SearchConfig sc;
          sc.tau = cfg_.tau;
          sc.zeta_sq = noisy ? s.coarse_grid().ds : 1.0;
          for (double lam : default_lambda_grid(sys.sigma_span(sys.k()), p, cfg_.grid_points))
            os << n << ',' << method_name(m) << ',' << csv_number(eps) << ',' << csv_number(lam) << ','
               << csv_number(functional_value(m, lam, sys, p, sc, n)) << ','
               << csv_number(search_objective(m, lam, sys, p, sc, n)) << '\n';
        });
      }
    }
  }
  const auto path = out_path("functionals.csv");
  write_file(path, os.str());
  return path;
}

std::filesystem::path Experiment::write_errors() {
  std::vector<ErrorRow> rows;
  for (std::size_t n : cfg_.resolutions)
    for (Method m : cfg_.methods)
      for (double eps : cfg_.epsilon_list)
        for (std::uint64_t seed : cfg_.noise.seeds) rows.push_back(error_row(n, m, eps, seed));
  std::stable_sort(rows.begin(), rows.end(), [](const ErrorRow& a, const ErrorRow& b) {
    return std::tie(a.n, a.method, a.epsilon, a.seed) < std::tie(b.n, b.method, b.epsilon, b.seed);
  });
  std::ostringstream os;
  os << "n,method,epsilon,seed,relative_error,lambda_tilde,lambda,p,boundary,max_abs_f\n";
  for (const ErrorRow& r : rows)
    os << r.n << ',' << method_name(r.method) << ',' << csv_number(r.epsilon) << ',' << r.seed << ','
       << csv_number(r.relative_error) << ',' << csv_number(r.lambda_tilde) << ',' << csv_number(r.lambda) << ','
       << r.p << ',' << (r.boundary ? 1 : 0) << ',' << csv_number(r.max_abs_f) << '\n';
  const auto path = out_path("errors.csv");
  write_file(path, os.str());
  return path;
}

std::filesystem::path Experiment::write_maxg() {
  std::ostringstream os;
  os << "N,d,max_g\n" << cfg_.N << ',' << csv_number(cfg_.d) << ',' << csv_number(max_g()) << '\n';
  const auto path = out_path("maxg.csv");
  write_file(path, os.str());
  return path;
}

std::filesystem::path Experiment::write_solution(std::size_t n, Method method, double epsilon, std::uint64_t seed) {
  const RegularizedSolution sol = solve(n, method, epsilon, seed);
  std::ostringstream os;
  os << "t,f,truth\n";
  for (std::size_t k = 0; k < sol.values.size(); ++k)
    os << csv_number(sol.grid.midpoints[k]) << ',' << csv_number(sol.values[k]) << ',' << csv_number(truth_[k])
       << '\n';
  const auto path = out_path("solution.csv");
  write_file(path, os.str());
  return path;
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
  Experiment ex(cfg);
  std::vector<std::filesystem::path> written;
  written.push_back(ex.write_delta());
  written.push_back(ex.write_spectrum());
  written.push_back(ex.write_picard());
  if (!cfg.methods.empty()) {
    written.push_back(ex.write_maxg());
    written.push_back(ex.write_functionals());
    written.push_back(ex.write_errors());
  }
  return written;
}

}  // namespace regscale

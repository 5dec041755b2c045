#include "regscale/galerkin.hpp"

#include <cmath>
#include <string>

#include "regscale/error.hpp"
#include "regscale/simd.hpp"

namespace regscale {

Grid make_grid(std::size_t n) {
  if (n == 0) throw InputError("grid size must be positive");
  Grid g;
  g.n = n;
  g.ds = 1.0 / static_cast<double>(n);
  g.midpoints.resize(n);
  // (i + 1/2) / n rounds the same exact rational for nested grids, so fine and
  // coarse midpoints that coincide mathematically are bitwise equal.
  for (std::size_t i = 0; i < n; ++i) g.midpoints[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return g;
}

std::string_view assembly_name(Assembly a) { return a == Assembly::Exact ? "exact" : "midpoint"; }

Assembly parse_assembly(std::string_view name) {
  if (name == "midpoint") return Assembly::Midpoint;
  if (name == "exact") return Assembly::Exact;
  throw InputError("unknown assembly: " + std::string(name));
}

Eigen::MatrixXd build_matrix(const KernelSpec& spec, const Grid& grid_s, const Grid& grid_t, Assembly assembly) {
  const auto ns = static_cast<Eigen::Index>(grid_s.n);
  const auto nt = static_cast<Eigen::Index>(grid_t.n);
  Eigen::MatrixXd A(ns, nt);

  if (assembly == Assembly::Exact) {
    if (!spec.is_gravity()) throw UnsupportedError("exact assembly is only available for the gravity kernel");
    if (grid_s.n != grid_t.n) throw UnsupportedError("exact assembly needs ds == dt");
    std::vector<double> s_left(grid_s.n);
    for (std::size_t i = 0; i < grid_s.n; ++i) s_left[i] = grid_s.left_edge(i);
    // The entry depends on s - t only through an even function, so column j
    // is a row evaluation with the roles of s and t swapped.
    for (Eigen::Index j = 0; j < nt; ++j) {
      simd::gravity_exact_row(spec.depth(), grid_t.ds, grid_t.left_edge(static_cast<std::size_t>(j)), s_left,
                              {A.col(j).data(), grid_s.n});
    }
    return A;
  }

  const double w = std::sqrt(grid_s.ds * grid_t.ds);
  if (spec.is_gravity()) {
    for (Eigen::Index j = 0; j < nt; ++j) {
      simd::gravity_midpoint_row(spec.depth(), grid_t.midpoints[static_cast<std::size_t>(j)], grid_s.midpoints, w,
                                 {A.col(j).data(), grid_s.n});
    }
    return A;
  }
  for (Eigen::Index j = 0; j < nt; ++j)
    for (Eigen::Index i = 0; i < ns; ++i)
      A(i, j) = w * kernel_eval(spec, grid_s.midpoints[static_cast<std::size_t>(i)],
                                grid_t.midpoints[static_cast<std::size_t>(j)]);
  return A;
}

Eigen::VectorXd data_coefficients(std::span<const double> samples, double ds) {
  if (!(ds > 0.0)) throw InputError("data_coefficients: ds must be positive");
  const double w = std::sqrt(ds);
  Eigen::VectorXd b(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) b[static_cast<Eigen::Index>(i)] = samples[i] * w;
  return b;
}

std::vector<std::size_t> coarse_sample_indices(std::size_t N, std::size_t ell) {
  if (ell == 0) throw InputError("downsampling factor must be positive");
  if (N % ell != 0)
    throw InputError("fine size " + std::to_string(N) + " is not divisible by " + std::to_string(ell));
  const std::size_t n = N / ell;
  const std::size_t offset = (ell - 1) / 2;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i * ell + offset;
  return idx;
}

std::vector<double> downsample_samples(std::span<const double> fine, std::size_t ell) {
  const auto idx = coarse_sample_indices(fine.size(), ell);
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = fine[idx[i]];
  return out;
}

Eigen::MatrixXd downsample_matrix(const Eigen::MatrixXd& A_fine, std::size_t ell) {
  if (A_fine.rows() != A_fine.cols()) throw InputError("downsample_matrix expects a square fine matrix");
  if (ell == 1) return A_fine;
  const auto idx = coarse_sample_indices(static_cast<std::size_t>(A_fine.rows()), ell);
  const auto n = static_cast<Eigen::Index>(idx.size());
  // sqrt(ds_n dt_n) / sqrt(ds_N dt_N) = ell on uniform grids.
  const double scale = static_cast<double>(ell);
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      A(i, j) = scale * A_fine(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                               static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
  return A;
}

DiscreteSystem assemble_system(const KernelSpec& spec, const Grid& grid, std::span<const double> samples,
                               Assembly assembly) {
  if (samples.size() != grid.n) throw InputError("sample count does not match grid size");
  DiscreteSystem sys;
  sys.A = build_matrix(spec, grid, grid, assembly);
  sys.b = data_coefficients(samples, grid.ds);
  sys.grid_s = grid;
  sys.grid_t = grid;
  sys.assembly = assembly;
  return sys;
}

double frobenius_sq(const Eigen::MatrixXd& A) {
  return simd::sum_squares({A.data(), static_cast<std::size_t>(A.size())});
}

double delta_sq(const KernelSpec& spec, const Eigen::MatrixXd& A) { return kernel_norm_sq(spec) - frobenius_sq(A); }

}  // namespace regscale

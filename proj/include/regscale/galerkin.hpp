#pragma once

// Galerkin discretization with the normalized indicator basis
// psi_i = 1/sqrt(ds) on cell i. Matrices are dense Eigen column-major.

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

#include "regscale/grid.hpp"
#include "regscale/problem.hpp"

namespace regscale {

enum class Assembly { Midpoint, Exact };

std::string_view assembly_name(Assembly a);
/// Accepts "midpoint" / "exact"; InputError otherwise.
Assembly parse_assembly(std::string_view name);

struct DiscreteSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Grid grid_s;
  Grid grid_t;
  Assembly assembly = Assembly::Midpoint;
};

/// Midpoint: a_ij = sqrt(ds*dt) * H(s_i, t_j).
/// Exact: a_ij = element_integral_exact (gravity, ds == dt only).
Eigen::MatrixXd build_matrix(const KernelSpec& spec, const Grid& grid_s, const Grid& grid_t, Assembly assembly);

/// b_i = g(s_i) * sqrt(ds).
Eigen::VectorXd data_coefficients(std::span<const double> samples, double ds);

/// Fine indices sampled for the coarse grid of size N / ell: i*ell + (ell-1)/2.
/// For odd ell the coarse and fine midpoints coincide; for even ell this is
/// the fine midpoint just left of the coarse one.
std::vector<std::size_t> coarse_sample_indices(std::size_t N, std::size_t ell);

std::vector<double> downsample_samples(std::span<const double> fine, std::size_t ell);

/// Coarse matrix by sampling and scaling: a_ij = ell * A_fine(idx_i, idx_j).
Eigen::MatrixXd downsample_matrix(const Eigen::MatrixXd& A_fine, std::size_t ell);

DiscreteSystem assemble_system(const KernelSpec& spec, const Grid& grid, std::span<const double> samples,
                               Assembly assembly);

double frobenius_sq(const Eigen::MatrixXd& A);

/// ||H||^2 - ||A||_F^2, signed. Needs the analytic kernel norm.
double delta_sq(const KernelSpec& spec, const Eigen::MatrixXd& A);

}  // namespace regscale

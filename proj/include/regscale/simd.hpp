#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version in
// regscale::simd::scalar and, when built with REGSCALE_HAVE_AVX2, an AVX2/FMA
// version in regscale::simd::avx2. The unqualified entry points dispatch at
// runtime to the widest ISA the CPU supports.

#include <cstddef>
#include <span>
#include <string_view>

namespace regscale::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// True if the kernels for `isa` were compiled in and the CPU can run them.
bool isa_supported(Isa isa);

/// ISA used by the dispatching entry points.
Isa active_isa();

/// Override the dispatch (tests and benchmarks). Throws InputError if the
/// ISA is not supported. Not synchronized with concurrent kernel calls.
void force_isa(Isa isa);

/// Sums over the filtered spectrum for one lambda:
///   eta1 = sum beta_i^2 (1 - q_i),  eta2 = sum beta_i^2 (1 - q_i)^2,  qsum = sum q_i
/// with q_i = sigma_i^2 / (lambda^2 + sigma_i^2).
struct FilterSums {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double qsum = 0.0;
};

// out[j] = weight * d / (d^2 + (s - t[j])^2)^{3/2}
void gravity_midpoint_row(double depth, double s, std::span<const double> t, double weight, std::span<double> out);

// out[j] = normalized exact cell integral for cells with left edges s_left and
// t_left[j], common width h.
void gravity_exact_row(double depth, double h, double s_left, std::span<const double> t_left, std::span<double> out);

FilterSums filter_sums(double lambda, std::span<const double> sigma, std::span<const double> beta);

// out[i] = q(lambda, sigma_i) * beta_i / sigma_i
void filtered_coefficients(double lambda, std::span<const double> sigma, std::span<const double> beta,
                           std::span<double> out);

double sum_squares(std::span<const double> x);

namespace scalar {
void gravity_midpoint_row(double depth, double s, std::span<const double> t, double weight, std::span<double> out);
void gravity_exact_row(double depth, double h, double s_left, std::span<const double> t_left, std::span<double> out);
FilterSums filter_sums(double lambda, std::span<const double> sigma, std::span<const double> beta);
void filtered_coefficients(double lambda, std::span<const double> sigma, std::span<const double> beta,
                           std::span<double> out);
double sum_squares(std::span<const double> x);
}  // namespace scalar

#ifdef REGSCALE_HAVE_AVX2
namespace avx2 {
void gravity_midpoint_row(double depth, double s, std::span<const double> t, double weight, std::span<double> out);
void gravity_exact_row(double depth, double h, double s_left, std::span<const double> t_left, std::span<double> out);
FilterSums filter_sums(double lambda, std::span<const double> sigma, std::span<const double> beta);
void filtered_coefficients(double lambda, std::span<const double> sigma, std::span<const double> beta,
                           std::span<double> out);
double sum_squares(std::span<const double> x);
}  // namespace avx2
#endif

}  // namespace regscale::simd

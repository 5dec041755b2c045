#include <atomic>
#include <string>

#include "regscale/error.hpp"
#include "regscale/simd.hpp"

namespace regscale::simd {
namespace {

bool cpu_has_avx2() {
#if defined(REGSCALE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InputError(std::string(what) + ": span length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_supported(isa)) throw InputError("ISA not supported on this build/CPU: " + std::string(isa_name(isa)));
  current().store(isa, std::memory_order_relaxed);
}

void gravity_midpoint_row(double depth, double s, std::span<const double> t, double weight, std::span<double> out) {
  check_same(t.size(), out.size(), "gravity_midpoint_row");
#ifdef REGSCALE_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return avx2::gravity_midpoint_row(depth, s, t, weight, out);
#endif
  scalar::gravity_midpoint_row(depth, s, t, weight, out);
}

void gravity_exact_row(double depth, double h, double s_left, std::span<const double> t_left, std::span<double> out) {
  check_same(t_left.size(), out.size(), "gravity_exact_row");
#ifdef REGSCALE_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return avx2::gravity_exact_row(depth, h, s_left, t_left, out);
#endif
  scalar::gravity_exact_row(depth, h, s_left, t_left, out);
}

FilterSums filter_sums(double lambda, std::span<const double> sigma, std::span<const double> beta) {
  check_same(sigma.size(), beta.size(), "filter_sums");
#ifdef REGSCALE_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return avx2::filter_sums(lambda, sigma, beta);
#endif
  return scalar::filter_sums(lambda, sigma, beta);
}

void filtered_coefficients(double lambda, std::span<const double> sigma, std::span<const double> beta,
                           std::span<double> out) {
  check_same(sigma.size(), beta.size(), "filtered_coefficients");
  check_same(sigma.size(), out.size(), "filtered_coefficients");
#ifdef REGSCALE_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return avx2::filtered_coefficients(lambda, sigma, beta, out);
#endif
  scalar::filtered_coefficients(lambda, sigma, beta, out);
}

double sum_squares(std::span<const double> x) {
#ifdef REGSCALE_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return avx2::sum_squares(x);
#endif
  return scalar::sum_squares(x);
}

}  // namespace regscale::simd

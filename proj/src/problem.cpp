#include "regscale/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "regscale/error.hpp"
#include "regscale/simd.hpp"

namespace regscale {
namespace {

void check_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw InputError(std::string(name) + " outside [0,1]: " + std::to_string(x));
}

const GravityKernel& require_gravity(const KernelSpec& spec, const char* op) {
  if (const auto* g = std::get_if<GravityKernel>(&spec.family())) return *g;
  throw UnsupportedError(std::string(op) + " is only available for the gravity kernel");
}

}  // namespace

KernelSpec KernelSpec::gravity(double depth) {
  if (!(depth > 0.0) || !std::isfinite(depth)) throw InputError("gravity kernel requires depth > 0");
  return KernelSpec(GravityKernel{depth});
}

KernelSpec KernelSpec::tabulated(std::function<double(double, double)> fn) {
  if (!fn) throw InputError("tabulated kernel requires a callable");
  return KernelSpec(TabulatedKernel{std::move(fn)});
}

double KernelSpec::depth() const { return require_gravity(*this, "depth").depth; }

SourceSpec SourceSpec::piecewise_constant(PiecewiseConstant pc) {
  if (pc.levels.size() != pc.breakpoints.size() + 1)
    throw InputError("piecewise-constant source needs levels.size() == breakpoints.size() + 1");
  for (std::size_t k = 0; k < pc.breakpoints.size(); ++k) {
    const double b = pc.breakpoints[k];
    if (!(b > 0.0 && b < 1.0)) throw InputError("breakpoints must lie in (0,1)");
    if (k > 0 && !(b > pc.breakpoints[k - 1])) throw InputError("breakpoints must be strictly increasing");
  }
  return SourceSpec(std::move(pc));
}

double kernel_eval(const KernelSpec& spec, double s, double t) {
  check_unit(s, "s");
  check_unit(t, "t");
  if (const auto* g = std::get_if<GravityKernel>(&spec.family())) {
    const double d = g->depth;
    const double r2 = d * d + (s - t) * (s - t);
    return d / (r2 * std::sqrt(r2));
  }
  const double v = std::get<TabulatedKernel>(spec.family()).fn(s, t);
  if (!std::isfinite(v)) throw NumericError("tabulated kernel returned a non-finite value");
  return v;
}

double kernel_norm_sq(const KernelSpec& spec) {
  const double d = require_gravity(spec, "kernel_norm_sq").depth;
  return (3.0 * std::atan(1.0 / d) + d / (d * d + 1.0)) / (4.0 * d * d * d);
}

double element_integral_exact(const KernelSpec& spec, const Grid& grid_s, const Grid& grid_t, std::size_t i,
                              std::size_t j) {
  const double d = require_gravity(spec, "element_integral_exact").depth;
  if (grid_s.n != grid_t.n)
    throw UnsupportedError("exact element integrals need equal spacing in s and t (use midpoint assembly)");
  if (i >= grid_s.n || j >= grid_t.n) throw InputError("element index out of range");
  const double t_left = grid_t.left_edge(j);
  double out = 0.0;
  simd::scalar::gravity_exact_row(d, grid_t.ds, grid_s.left_edge(i), {&t_left, 1}, {&out, 1});
  return out;
}

double source_eval(const SourceSpec& spec, double t) {
  check_unit(t, "t");
  if (std::holds_alternative<SmoothSine>(spec.family())) {
    return std::sin(std::numbers::pi * t) + 0.5 * std::sin(2.0 * std::numbers::pi * t);
  }
  const auto& pc = std::get<PiecewiseConstant>(spec.family());
  const auto it = std::lower_bound(pc.breakpoints.begin(), pc.breakpoints.end(), t);
  return pc.levels[static_cast<std::size_t>(it - pc.breakpoints.begin())];
}

std::vector<double> forward_data(const KernelSpec& kernel, const SourceSpec& source, const Grid& data_grid,
                                 const Grid& quadrature_grid) {
  const std::size_t m = quadrature_grid.n;
  std::vector<double> f(m);
  for (std::size_t j = 0; j < m; ++j) f[j] = source_eval(source, quadrature_grid.midpoints[j]);

  std::vector<double> g(data_grid.n, 0.0);
  std::vector<double> row(m);
  for (std::size_t i = 0; i < data_grid.n; ++i) {
    const double s = data_grid.midpoints[i];
    if (kernel.is_gravity()) {
      simd::gravity_midpoint_row(kernel.depth(), s, quadrature_grid.midpoints, quadrature_grid.ds, row);
    } else {
      for (std::size_t j = 0; j < m; ++j) row[j] = quadrature_grid.ds * kernel_eval(kernel, s, quadrature_grid.midpoints[j]);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += row[j] * f[j];
    g[i] = acc;
  }
  return g;
}

}  // namespace regscale

#pragma once

// Kernels and source functions on [0,1]x[0,1], including the gravity
// surveying family H(s,t) = d / (d^2 + (s-t)^2)^{3/2}.

#include <functional>
#include <variant>
#include <vector>

#include "regscale/grid.hpp"

namespace regscale {

struct GravityKernel {
  double depth = 0.25;
};

struct TabulatedKernel {
  std::function<double(double, double)> fn;
};

class KernelSpec {
 public:
  using Family = std::variant<GravityKernel, TabulatedKernel>;

  /// Throws InputError unless depth > 0.
  static KernelSpec gravity(double depth);
  /// Throws InputError for an empty callable.
  static KernelSpec tabulated(std::function<double(double, double)> fn);

  [[nodiscard]] const Family& family() const { return family_; }
  [[nodiscard]] bool is_gravity() const { return std::holds_alternative<GravityKernel>(family_); }
  /// Depth of a gravity kernel; UnsupportedError otherwise.
  [[nodiscard]] double depth() const;

 private:
  explicit KernelSpec(Family f) : family_(std::move(f)) {}
  Family family_;
};

struct SmoothSine {};

/// Step function. Breakpoints are strictly increasing in (0,1) and there is
/// one more level than breakpoints. A point exactly on a breakpoint belongs
/// to the interval on its left (intervals are right-closed).
struct PiecewiseConstant {
  std::vector<double> breakpoints{1.0 / 3.0, 2.0 / 3.0};
  std::vector<double> levels{0.5, 1.5, 0.75};
};

class SourceSpec {
 public:
  using Family = std::variant<SmoothSine, PiecewiseConstant>;

  static SourceSpec smooth_sine() { return SourceSpec(SmoothSine{}); }
  /// Throws InputError if the breakpoint/level layout is invalid.
  static SourceSpec piecewise_constant(PiecewiseConstant pc);

  [[nodiscard]] const Family& family() const { return family_; }

 private:
  explicit SourceSpec(Family f) : family_(std::move(f)) {}
  Family family_;
};

double kernel_eval(const KernelSpec& spec, double s, double t);

/// ||H||_2^2 over the unit square. Gravity only.
double kernel_norm_sq(const KernelSpec& spec);

/// Normalized Galerkin entry (1/sqrt(ds*dt)) * integral of H over cell i of
/// grid_s times cell j of grid_t, in closed form. Gravity only, ds == dt.
double element_integral_exact(const KernelSpec& spec, const Grid& grid_s, const Grid& grid_t, std::size_t i,
                              std::size_t j);

double source_eval(const SourceSpec& spec, double t);

/// Clean data g(s_i) = sum_j dt * H(s_i, t_j) * f(t_j), midpoint rule over
/// the quadrature grid.
std::vector<double> forward_data(const KernelSpec& kernel, const SourceSpec& source, const Grid& data_grid,
                                 const Grid& quadrature_grid);

}  // namespace regscale

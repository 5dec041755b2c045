#include <cmath>

#include "regscale/simd.hpp"

namespace regscale::simd::scalar {

void gravity_midpoint_row(double depth, double s, std::span<const double> t, double weight, std::span<double> out) {
  const double d2 = depth * depth;
  const double wd = weight * depth;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double u = s - t[j];
    const double r2 = d2 + u * u;
    out[j] = wd / (r2 * std::sqrt(r2));
  }
}

// The closed form is a second difference of R(u) = sqrt(u^2 + d^2) / d,
//   (R(u+h) + R(u-h) - 2 R(u)) / h,
// rewritten without the O(h^2) cancellation:
//   h * (Rm + 2 R0 + Rp - 8 u^2 / (Rm + Rp)) / (d (Rp + R0)(R0 + Rm)).
void gravity_exact_row(double depth, double h, double s_left, std::span<const double> t_left, std::span<double> out) {
  const double d2 = depth * depth;
  for (std::size_t j = 0; j < t_left.size(); ++j) {
    const double u = s_left - t_left[j];
    const double rm = std::sqrt((u - h) * (u - h) + d2);
    const double r0 = std::sqrt(u * u + d2);
    const double rp = std::sqrt((u + h) * (u + h) + d2);
    const double num = (rm + 2.0 * r0 + rp) - 8.0 * u * u / (rm + rp);
    out[j] = h * num / (depth * (rp + r0) * (r0 + rm));
  }
}

FilterSums filter_sums(double lambda, std::span<const double> sigma, std::span<const double> beta) {
  const double l2 = lambda * lambda;
  FilterSums acc;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double s2 = sigma[i] * sigma[i];
    const double inv = 1.0 / (l2 + s2);
    const double q = s2 * inv;
    const double r = l2 * inv;
    const double b2 = beta[i] * beta[i];
    acc.eta1 += b2 * r;
    acc.eta2 += b2 * r * r;
    acc.qsum += q;
  }
  return acc;
}

void filtered_coefficients(double lambda, std::span<const double> sigma, std::span<const double> beta,
                           std::span<double> out) {
  const double l2 = lambda * lambda;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    out[i] = sigma[i] * beta[i] / (l2 + sigma[i] * sigma[i]);
  }
}

double sum_squares(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

}  // namespace regscale::simd::scalar

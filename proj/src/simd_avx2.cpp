// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher.
#include <immintrin.h>

#include <cmath>

#include "regscale/simd.hpp"

namespace regscale::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void gravity_midpoint_row(double depth, double s, std::span<const double> t, double weight, std::span<double> out) {
  const std::size_t n = t.size();
  const __m256d vd2 = _mm256_set1_pd(depth * depth);
  const __m256d vwd = _mm256_set1_pd(weight * depth);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d u = _mm256_sub_pd(vs, _mm256_loadu_pd(t.data() + j));
    const __m256d r2 = _mm256_fmadd_pd(u, u, vd2);
    const __m256d den = _mm256_mul_pd(r2, _mm256_sqrt_pd(r2));
    _mm256_storeu_pd(out.data() + j, _mm256_div_pd(vwd, den));
  }
  if (j < n) scalar::gravity_midpoint_row(depth, s, t.subspan(j), weight, out.subspan(j));
}

void gravity_exact_row(double depth, double h, double s_left, std::span<const double> t_left, std::span<double> out) {
  const std::size_t n = t_left.size();
  const __m256d vd2 = _mm256_set1_pd(depth * depth);
  const __m256d vh = _mm256_set1_pd(h);
  const __m256d vs = _mm256_set1_pd(s_left);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d eight = _mm256_set1_pd(8.0);
  const __m256d vd = _mm256_set1_pd(depth);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d u = _mm256_sub_pd(vs, _mm256_loadu_pd(t_left.data() + j));
    const __m256d um = _mm256_sub_pd(u, vh);
    const __m256d up = _mm256_add_pd(u, vh);
    const __m256d rm = _mm256_sqrt_pd(_mm256_fmadd_pd(um, um, vd2));
    const __m256d r0 = _mm256_sqrt_pd(_mm256_fmadd_pd(u, u, vd2));
    const __m256d rp = _mm256_sqrt_pd(_mm256_fmadd_pd(up, up, vd2));
    const __m256d outer = _mm256_add_pd(rm, rp);
    const __m256d lhs = _mm256_fmadd_pd(two, r0, outer);
    const __m256d corr = _mm256_div_pd(_mm256_mul_pd(eight, _mm256_mul_pd(u, u)), outer);
    const __m256d num = _mm256_sub_pd(lhs, corr);
    const __m256d den = _mm256_mul_pd(_mm256_mul_pd(vd, _mm256_add_pd(rp, r0)), _mm256_add_pd(r0, rm));
    _mm256_storeu_pd(out.data() + j, _mm256_div_pd(_mm256_mul_pd(vh, num), den));
  }
  if (j < n) scalar::gravity_exact_row(depth, h, s_left, t_left.subspan(j), out.subspan(j));
}

FilterSums filter_sums(double lambda, std::span<const double> sigma, std::span<const double> beta) {
  const std::size_t n = sigma.size();
  const __m256d vl2 = _mm256_set1_pd(lambda * lambda);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d e1 = _mm256_setzero_pd();
  __m256d e2 = _mm256_setzero_pd();
  __m256d qs = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sg = _mm256_loadu_pd(sigma.data() + i);
    const __m256d bt = _mm256_loadu_pd(beta.data() + i);
    const __m256d s2 = _mm256_mul_pd(sg, sg);
    const __m256d inv = _mm256_div_pd(one, _mm256_add_pd(vl2, s2));
    const __m256d r = _mm256_mul_pd(vl2, inv);
    const __m256d b2r = _mm256_mul_pd(_mm256_mul_pd(bt, bt), r);
    e1 = _mm256_add_pd(e1, b2r);
    e2 = _mm256_fmadd_pd(b2r, r, e2);
    qs = _mm256_fmadd_pd(s2, inv, qs);
  }
  FilterSums acc{hsum(e1), hsum(e2), hsum(qs)};
  if (i < n) {
    const FilterSums tail = scalar::filter_sums(lambda, sigma.subspan(i), beta.subspan(i));
    acc.eta1 += tail.eta1;
    acc.eta2 += tail.eta2;
    acc.qsum += tail.qsum;
  }
  return acc;
}

void filtered_coefficients(double lambda, std::span<const double> sigma, std::span<const double> beta,
                           std::span<double> out) {
  const std::size_t n = sigma.size();
  const __m256d vl2 = _mm256_set1_pd(lambda * lambda);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sg = _mm256_loadu_pd(sigma.data() + i);
    const __m256d bt = _mm256_loadu_pd(beta.data() + i);
    const __m256d den = _mm256_fmadd_pd(sg, sg, vl2);
    _mm256_storeu_pd(out.data() + i, _mm256_div_pd(_mm256_mul_pd(sg, bt), den));
  }
  if (i < n) scalar::filtered_coefficients(lambda, sigma.subspan(i), beta.subspan(i), out.subspan(i));
}

double sum_squares(std::span<const double> x) {
  const std::size_t n = x.size();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(x.data() + i);
    const __m256d v1 = _mm256_loadu_pd(x.data() + i + 4);
    a0 = _mm256_fmadd_pd(v0, v0, a0);
    a1 = _mm256_fmadd_pd(v1, v1, a1);
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

}  // namespace regscale::simd::avx2

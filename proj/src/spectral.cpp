#include "regscale/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "regscale/error.hpp"

namespace regscale {
namespace {

void fix_signs(Factorization& f) {
  for (Eigen::Index c = 0; c < f.U.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < f.U.rows(); ++r) {
      const double a = std::abs(f.U(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (f.U(arg, c) < 0.0) {
      f.U.col(c) *= -1.0;
      f.V.col(c) *= -1.0;
    }
  }
}

void drop_zero_tail(Factorization& f) {
  Eigen::Index k = f.sigma.size();
  while (k > 0 && !(f.sigma[k - 1] > 0.0)) --k;
  if (k == 0) throw NumericError("matrix is numerically zero: no positive singular values");
  if (k < f.sigma.size()) {
    f.sigma.conservativeResize(k);
    f.U.conservativeResize(Eigen::NoChange, k);
    f.V.conservativeResize(Eigen::NoChange, k);
  }
}

Factorization full_svd(Eigen::MatrixXd a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int mn = std::min(m, n);
  Factorization f;
  f.sigma.resize(mn);
  f.U.resize(m, mn);
  Eigen::MatrixXd vt(mn, n);
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, f.sigma.data(), f.U.data(), m,
                                         vt.data(), mn);
  if (info != 0) throw NumericError("dgesdd failed, info = " + std::to_string(info));
  f.V = vt.transpose();
  return f;
}

Factorization partial_svd(Eigen::MatrixXd a, std::size_t k) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int mn = std::min(m, n);
  const auto kk = static_cast<lapack_int>(k);
  Factorization f;
  Eigen::VectorXd s(mn);
  f.U.resize(m, kk);
  Eigen::MatrixXd vt(kk, n);
  std::vector<lapack_int> superb(static_cast<std::size_t>(12 * mn));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dgesvdx(LAPACK_COL_MAJOR, 'V', 'V', 'I', m, n, a.data(), m, 0.0, 0.0, 1, kk, &found,
                                          s.data(), f.U.data(), m, vt.data(), kk, superb.data());
  if (info != 0) throw NumericError("dgesvdx failed, info = " + std::to_string(info));
  if (found != kk) throw NumericError("dgesvdx returned " + std::to_string(found) + " of " + std::to_string(kk));
  f.sigma = s.head(kk);
  f.V = vt.transpose();
  return f;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

double max_residual(const Eigen::MatrixXd& A, const Factorization& f, Eigen::Index k) {
  const Eigen::MatrixXd r1 = A * f.V.leftCols(k) - f.U.leftCols(k) * f.sigma.head(k).asDiagonal();
  const Eigen::MatrixXd r2 = A.transpose() * f.U.leftCols(k) - f.V.leftCols(k) * f.sigma.head(k).asDiagonal();
  return std::max(r1.colwise().norm().maxCoeff(), r2.colwise().norm().maxCoeff());
}

// Block subspace iteration from a fixed-seed Gaussian start, followed by a
// Rayleigh-Ritz SVD of the projected matrix. Returns nothing when the
// triplet residuals do not reach the tolerance.
std::optional<Factorization> subspace_svd(const Eigen::MatrixXd& A, std::size_t k) {
  const Eigen::Index mn = std::min(A.rows(), A.cols());
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::Index l = std::min(mn, 2 * kk + 16);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd omega(A.cols(), l);
  for (Eigen::Index j = 0; j < omega.cols(); ++j)
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(rng);

  Eigen::MatrixXd Q = orthonormal_basis(A * omega);
  for (int sweep = 0; sweep < 8; ++sweep) {
    for (int it = 0; it < 2; ++it) {
      const Eigen::MatrixXd W = orthonormal_basis(A.transpose() * Q);
      Q = orthonormal_basis(A * W);
    }
    Eigen::MatrixXd B = Q.transpose() * A;
    Factorization small = full_svd(B);
    Factorization f;
    f.sigma = small.sigma.head(kk);
    f.U = Q * small.U.leftCols(kk);
    f.V = small.V.leftCols(kk);
    const double tol = 1e-12 * f.sigma[0];
    if (max_residual(A, f, kk) <= tol) return f;
  }
  return std::nullopt;
}

}  // namespace

std::shared_ptr<const Factorization> factorize(const Eigen::MatrixXd& A, std::optional<std::size_t> k) {
  if (A.size() == 0) throw InputError("factorize: empty matrix");
  if (!A.allFinite()) throw InputError("factorize: matrix has non-finite entries");
  const auto mn = static_cast<std::size_t>(std::min(A.rows(), A.cols()));
  if (k && (*k == 0 || *k > mn)) throw InputError("factorize: k must be in [1, min(rows, cols)]");
  if (A.cwiseAbs().maxCoeff() == 0.0) throw NumericError("matrix is numerically zero: no positive singular values");

  Factorization f;
  if (k && *k < mn) {
    auto fast = subspace_svd(A, *k);
    f = fast ? std::move(*fast) : partial_svd(A, *k);
  } else {
    f = full_svd(A);
  }
  drop_zero_tail(f);
  fix_signs(f);
  return std::make_shared<const Factorization>(std::move(f));
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& A) {
  if (A.size() == 0) throw InputError("singular_values: empty matrix");
  if (!A.allFinite()) throw InputError("singular_values: matrix has non-finite entries");
  Eigen::MatrixXd a = A;
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  Eigen::VectorXd s(std::min(m, n));
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericError("dgesdd failed, info = " + std::to_string(info));
  return s;
}

SpectralSystem::SpectralSystem(std::shared_ptr<const Factorization> factors, const Eigen::VectorXd& b)
    : factors_(std::move(factors)) {
  if (!factors_) throw InputError("SpectralSystem: null factorization");
  if (b.size() != factors_->U.rows()) throw InputError("SpectralSystem: data length does not match matrix rows");
  beta_ = factors_->U.transpose() * b;
  b_norm_sq_ = b.squaredNorm();
  n_ = static_cast<std::size_t>(b.size());
}

SpectralSystem SpectralSystem::from_spectrum(Eigen::VectorXd sigma, Eigen::VectorXd beta, double b_norm_sq,
                                             std::optional<Eigen::MatrixXd> V) {
  if (sigma.size() == 0 || sigma.size() != beta.size()) throw InputError("from_spectrum: sigma/beta size mismatch");
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw InputError("from_spectrum: singular values must be positive");
    if (i > 0 && sigma[i] > sigma[i - 1]) throw InputError("from_spectrum: singular values must be nonincreasing");
  }
  Factorization f;
  const auto k = sigma.size();
  f.V = V ? std::move(*V) : Eigen::MatrixXd::Identity(k, k);
  if (f.V.cols() != k) throw InputError("from_spectrum: V must have one column per singular value");
  f.U = Eigen::MatrixXd::Identity(k, k);
  f.sigma = std::move(sigma);
  SpectralSystem sys;
  sys.factors_ = std::make_shared<const Factorization>(std::move(f));
  sys.beta_ = std::move(beta);
  sys.b_norm_sq_ = b_norm_sq;
  sys.n_ = static_cast<std::size_t>(k);
  return sys;
}

SpectralSystem decompose(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, std::optional<std::size_t> k) {
  if (b.size() != A.rows()) throw InputError("decompose: data length does not match matrix rows");
  return SpectralSystem(factorize(A, k), b);
}

std::size_t numerical_rank(std::span<const double> sigma, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("numerical_rank: epsilon must be positive");
  for (std::size_t i = 1; i < sigma.size(); ++i)
    if (sigma[i] > sigma[i - 1]) throw InputError("numerical_rank: singular values are not sorted nonincreasing");
  std::size_t p = 0;
  while (p < sigma.size() && sigma[p] > epsilon) ++p;
  return p;
}

std::vector<PicardRow> picard_table(const SpectralSystem& sys) {
  std::vector<PicardRow> rows;
  rows.reserve(sys.k());
  for (std::size_t i = 0; i < sys.k(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double s = sys.sigma()[ii];
    const double b = std::abs(sys.beta()[ii]);
    rows.push_back({i + 1, s, b, b / s});
  }
  return rows;
}

std::optional<double> singular_vector_bound(double delta, double mu_i, double mu_next) {
  const double gap = mu_i - mu_next;
  if (!(gap > 0.0) || delta < 0.0) return std::nullopt;
  return std::sqrt(2.0 * delta / gap);
}

}  // namespace regscale

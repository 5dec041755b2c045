#pragma once

// Singular value decomposition with a deterministic sign convention, numerical
// rank and Picard diagnostics.

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace regscale {

/// Dominant singular triplets of a matrix. Each column of U has its
/// largest-magnitude entry positive (lowest index on ties); V follows.
struct Factorization {
  Eigen::VectorXd sigma;  // nonincreasing, strictly positive
  Eigen::MatrixXd U;      // rows x k
  Eigen::MatrixXd V;      // cols x k
};

/// k dominant triplets (all of them when k is empty). Exactly-zero trailing
/// singular values are dropped. NumericError for a zero matrix.
std::shared_ptr<const Factorization> factorize(const Eigen::MatrixXd& A, std::optional<std::size_t> k = std::nullopt);

/// All singular values, nonincreasing, without vectors.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& A);

/// Singular system paired with projected data beta = U^T b. Immutable; the
/// factorization is shared, so projecting many right-hand sides is cheap.
class SpectralSystem {
 public:
  SpectralSystem(std::shared_ptr<const Factorization> factors, const Eigen::VectorXd& b);

  /// System given directly by its spectrum (V = identity unless supplied).
  static SpectralSystem from_spectrum(Eigen::VectorXd sigma, Eigen::VectorXd beta, double b_norm_sq,
                                      std::optional<Eigen::MatrixXd> V = std::nullopt);

  [[nodiscard]] const Eigen::VectorXd& sigma() const { return factors_->sigma; }
  [[nodiscard]] const Eigen::VectorXd& beta() const { return beta_; }
  [[nodiscard]] const Eigen::MatrixXd& V() const { return factors_->V; }
  [[nodiscard]] const Factorization& factors() const { return *factors_; }
  [[nodiscard]] std::shared_ptr<const Factorization> shared_factors() const { return factors_; }
  [[nodiscard]] double b_norm_sq() const { return b_norm_sq_; }
  /// Length of the data vector (number of rows of A).
  [[nodiscard]] std::size_t n() const { return n_; }
  /// Number of computed triplets.
  [[nodiscard]] std::size_t k() const { return static_cast<std::size_t>(factors_->sigma.size()); }

  [[nodiscard]] std::span<const double> sigma_span(std::size_t p) const { return {sigma().data(), p}; }
  [[nodiscard]] std::span<const double> beta_span(std::size_t p) const { return {beta_.data(), p}; }

 private:
  SpectralSystem() = default;
  std::shared_ptr<const Factorization> factors_;
  Eigen::VectorXd beta_;
  double b_norm_sq_ = 0.0;
  std::size_t n_ = 0;
};

SpectralSystem decompose(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         std::optional<std::size_t> k = std::nullopt);

/// max{ i : sigma_i > epsilon } (1-based count), 0 if none. InputError if
/// sigma is not nonincreasing or epsilon <= 0.
std::size_t numerical_rank(std::span<const double> sigma, double epsilon);

struct PicardRow {
  std::size_t i = 0;  // 1-based
  double sigma = 0.0;
  double abs_beta = 0.0;
  double ratio = 0.0;  // |beta_i| / sigma_i
};

std::vector<PicardRow> picard_table(const SpectralSystem& sys);

/// sqrt(2 Delta / (mu_i - mu_{i+1})): bound on the distance between discrete
/// and continuous singular vectors, given Delta = sqrt(Delta^2) and a gap
/// estimate from a finer resolution. Empty if the gap is not positive.
std::optional<double> singular_vector_bound(double delta, double mu_i, double mu_next);

}  // namespace regscale

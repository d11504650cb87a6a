#pragma once

#include <optional>

#include "ncpf/errors.hpp"
#include "ncpf/rng.hpp"
#include "ncpf/types.hpp"

namespace ncpf {

struct EigenDecomposition {
  VecX eigenvalues;   // descending
  MatX eigenvectors;  // columns match eigenvalues
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
EigenDecomposition symmetric_eigendecomposition(const Eigen::Ref<const MatX>& s);

/// Nearest positive semidefinite matrix in Frobenius norm (negative
/// eigenvalues clipped to zero).
MatX psd_project(const Eigen::Ref<const MatX>& s);

/// Lower-triangular Cholesky factor of an SPD matrix.
MatX cholesky_factor(const Eigen::Ref<const MatX>& spd);

/// Measurement/process noise covariance with a diagonal fast path. Dense
/// covariances are factorized once (LLT) at construction.
class Covariance {
 public:
  Covariance() = default;
  static Covariance diagonal(VecX d);
  static Covariance isotropic(Index n, double variance);
  static Covariance dense(MatX m);

  bool is_diagonal() const { return diag_.size() > 0; }
  Index size() const;
  const VecX& diagonal_entries() const { return diag_; }
  MatX dense_matrix() const;
  double variance(Index i) const;

  /// r^T C^-1 r. Requires positive definiteness.
  double quad_form_inv(const Eigen::Ref<const VecX>& r) const;
  VecX solve(const Eigen::Ref<const VecX>& r) const;
  double log_det() const;

  /// mean-free sample L z with z standard normal drawn sequentially from rng.
  VecX sample(RngStream& rng) const;
  /// Marginal standard deviation of coordinate i.
  double marginal_std(Index i) const;

 private:
  VecX diag_;       // nonempty iff diagonal representation
  VecX diag_sqrt_;  // elementwise sqrt of diag_
  MatX dense_;      // nonempty iff dense representation
  MatX chol_;       // lower factor of dense_
  void require_pd(const char* op) const;
  bool pd_ = true;
};

double weighted_sq_norm(const Eigen::Ref<const VecX>& r, const Covariance& cov);

double gaussian_logpdf(const Eigen::Ref<const VecX>& y,
                       const Eigen::Ref<const VecX>& mean,
                       const Covariance& cov);

VecX gaussian_sample(const Eigen::Ref<const VecX>& mean, const Covariance& cov,
                     RngStream& rng);

/// log(sum_i exp(v_i)) with max subtraction; -inf for an all -inf input.
double log_sum_exp(const Eigen::Ref<const VecX>& logv);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
double chi_square_quantile(double dof, double p);

}  // namespace ncpf

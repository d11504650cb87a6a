#include "ncpf/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

namespace ncpf {

EigenDecomposition symmetric_eigendecomposition(
    const Eigen::Ref<const MatX>& s) {
  require(s.rows() == s.cols(), "symmetric_eigendecomposition: square input");
  require(s.allFinite(), "symmetric_eigendecomposition: finite input");
  Eigen::SelfAdjointEigenSolver<MatX> solver(symmetrize(s));
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigendecomposition did not converge for order " << s.rows();
    throw NumericFailure(msg.str());
  }
  const Index m = s.rows();
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  (void)m;
  return out;
}

MatX psd_project(const Eigen::Ref<const MatX>& s) {
  const EigenDecomposition eig = symmetric_eigendecomposition(s);
  const VecX clipped = eig.eigenvalues.cwiseMax(0.0);
  return symmetrize(eig.eigenvectors * clipped.asDiagonal() *
                    eig.eigenvectors.transpose());
}

MatX cholesky_factor(const Eigen::Ref<const MatX>& spd) {
  require(spd.rows() == spd.cols(), "cholesky_factor: square input");
  Eigen::LLT<MatX> llt(spd);
  if (llt.info() != Eigen::Success)
    throw NumericFailure("cholesky_factor: matrix is not positive definite");
  return llt.matrixL();
}

Covariance Covariance::diagonal(VecX d) {
  require(d.size() >= 1, "Covariance: empty diagonal");
  require((d.array() >= 0.0).all(), "Covariance: negative diagonal entry");
  Covariance c;
  c.pd_ = (d.array() > 0.0).all();
  c.diag_sqrt_ = d.cwiseSqrt();
  c.diag_ = std::move(d);
  return c;
}

Covariance Covariance::isotropic(Index n, double variance) {
  return diagonal(VecX::Constant(n, variance));
}

Covariance Covariance::dense(MatX m) {
  require(m.rows() == m.cols(), "Covariance: square matrix expected");
  require((m - m.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()),
          "Covariance: matrix is not symmetric");
  Covariance c;
  Eigen::LLT<MatX> llt(m);
  if (llt.info() == Eigen::Success) {
    c.chol_ = llt.matrixL();
  } else {
    // semidefinite fallback: eigenvalue square root, used for sampling only
    const EigenDecomposition eig = symmetric_eigendecomposition(m);
    if (eig.eigenvalues.minCoeff() < -1e-10 * std::max(1.0, eig.eigenvalues.cwiseAbs().maxCoeff()))
      throw NumericFailure("Covariance: matrix is not positive semidefinite");
    c.chol_ = eig.eigenvectors *
              eig.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    c.pd_ = false;
  }
  c.dense_ = std::move(m);
  return c;
}

Index Covariance::size() const {
  return is_diagonal() ? diag_.size() : dense_.rows();
}

MatX Covariance::dense_matrix() const {
  return is_diagonal() ? MatX(diag_.asDiagonal()) : dense_;
}

double Covariance::variance(Index i) const {
  return is_diagonal() ? diag_(i) : dense_(i, i);
}

void Covariance::require_pd(const char* op) const {
  if (!pd_) {
    std::ostringstream msg;
    msg << op << ": covariance is singular";
    throw NumericFailure(msg.str());
  }
}

double Covariance::quad_form_inv(const Eigen::Ref<const VecX>& r) const {
  require(r.size() == size(), "quad_form_inv: dimension mismatch");
  require_pd("quad_form_inv");
  if (is_diagonal()) return (r.array().square() / diag_.array()).sum();
  const VecX z = chol_.triangularView<Eigen::Lower>().solve(r);
  return z.squaredNorm();
}

VecX Covariance::solve(const Eigen::Ref<const VecX>& r) const {
  require(r.size() == size(), "Covariance::solve: dimension mismatch");
  require_pd("Covariance::solve");
  if (is_diagonal()) return r.cwiseQuotient(diag_);
  VecX z = chol_.triangularView<Eigen::Lower>().solve(r);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(z);
}

double Covariance::log_det() const {
  require_pd("Covariance::log_det");
  if (is_diagonal()) return diag_.array().log().sum();
  return 2.0 * chol_.diagonal().array().log().sum();
}

VecX Covariance::sample(RngStream& rng) const {
  const Index n = size();
  VecX z(n);
  for (Index i = 0; i < n; ++i) z(i) = rng.next_normal();
  if (is_diagonal()) return diag_sqrt_.cwiseProduct(z);
  return chol_ * z;
}

double Covariance::marginal_std(Index i) const {
  return std::sqrt(variance(i));
}

double weighted_sq_norm(const Eigen::Ref<const VecX>& r,
                        const Covariance& cov) {
  return cov.quad_form_inv(r);
}

double gaussian_logpdf(const Eigen::Ref<const VecX>& y,
                       const Eigen::Ref<const VecX>& mean,
                       const Covariance& cov) {
  require(y.size() == mean.size(), "gaussian_logpdf: dimension mismatch");
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const double quad = cov.quad_form_inv(y - mean);
  return -0.5 * (quad + static_cast<double>(y.size()) * kLog2Pi +
                 cov.log_det());
}

VecX gaussian_sample(const Eigen::Ref<const VecX>& mean, const Covariance& cov,
                     RngStream& rng) {
  require(mean.size() == cov.size(), "gaussian_sample: dimension mismatch");
  return mean + cov.sample(rng);
}

double log_sum_exp(const Eigen::Ref<const VecX>& logv) {
  require(logv.size() >= 1, "log_sum_exp: empty input");
  const double m = logv.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a nan propagates)
  return m + std::log((logv.array() - m).exp().sum());
}

namespace {

// P(a,x) by series for x < a+1, by continued fraction otherwise.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-290;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  require(a > 0.0 && x >= 0.0, "regularized_gamma_p: domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_square_quantile(double dof, double p) {
  require(dof > 0.0, "chi_square_quantile: dof > 0");
  require(p > 0.0 && p < 1.0, "chi_square_quantile: p in (0,1)");
  const double a = dof / 2.0;
  auto cdf = [a](double x) { return regularized_gamma_p(a, x / 2.0); };
  double lo = 0.0;
  double hi = dof + 10.0;
  while (cdf(hi) < p) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericFailure("chi_square_quantile: bracket failed");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ncpf

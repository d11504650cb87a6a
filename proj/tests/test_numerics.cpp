#include <doctest.h>

#include <cmath>

#include "ncpf/numerics.hpp"

using namespace ncpf;

namespace {

MatX random_symmetric(Index m, RngStream& rng) {
  MatX g(m, m);
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < m; ++c) g(r, c) = rng.next_normal();
  return symmetrize(g);
}

}  // namespace

TEST_SUITE_BEGIN("numerics");

TEST_CASE("eigendecomposition of a diagonal matrix") {
  VecX d(3);
  d << 2.0, -1.0, 5.0;
  const auto eig = symmetric_eigendecomposition(MatX(d.asDiagonal()));
  CHECK(eig.eigenvalues(0) == doctest::Approx(5.0));
  CHECK(eig.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(eig.eigenvalues(2) == doctest::Approx(-1.0));
  // columns are signed unit vectors
  for (Index c = 0; c < 3; ++c)
    CHECK(eig.eigenvectors.col(c).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("eigendecomposition 2x2 analytic") {
  MatX s(2, 2);
  s << 2, 1, 1, 2;
  const auto eig = symmetric_eigendecomposition(s);
  CHECK(eig.eigenvalues(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(eig.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eigendecomposition residual and orthonormality on random 31x31") {
  RngStream rng(11);
  const MatX s = random_symmetric(31, rng);
  const auto eig = symmetric_eigendecomposition(s);
  const MatX recon = eig.eigenvectors * eig.eigenvalues.asDiagonal() *
                     eig.eigenvectors.transpose();
  CHECK((s - recon).norm() <= 1e-9 * s.norm());
  const MatX vtv = eig.eigenvectors.transpose() * eig.eigenvectors;
  CHECK((vtv - MatX::Identity(31, 31)).norm() <= 1e-10);
  // eigenvalue sum equals trace
  CHECK(eig.eigenvalues.sum() ==
        doctest::Approx(s.trace()).epsilon(1e-10));
  // descending order
  for (Index i = 1; i < 31; ++i)
    CHECK(eig.eigenvalues(i - 1) >= eig.eigenvalues(i));
}

TEST_CASE("psd projection analytic clip and idempotency") {
  VecX d(2);
  d << 1.0, -2.0;
  const MatX p = psd_project(MatX(d.asDiagonal()));
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::abs(p(0, 1)) < 1e-14);

  RngStream rng(5);
  const MatX s = random_symmetric(31, rng);
  const MatX proj = psd_project(s);
  const MatX twice = psd_project(proj);
  CHECK((proj - twice).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(symmetric_eigendecomposition(proj).eigenvalues.minCoeff() >= -1e-10);
  // a PSD input passes through
  const MatX back = psd_project(proj);
  CHECK((back - proj).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("psd projection is the Frobenius-nearest candidate") {
  RngStream rng(17);
  const MatX s = random_symmetric(31, rng);
  const MatX p = psd_project(s);
  const double best = (s - p).norm();
  for (int trial = 0; trial < 1000; ++trial) {
    const MatX z = psd_project(p + 0.1 * random_symmetric(31, rng));
    CHECK((s - z).norm() >= best - 1e-9);
  }
}

TEST_CASE("cholesky") {
  CHECK((cholesky_factor(MatX::Identity(4, 4)) - MatX::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  VecX d(3);
  d << 4.0, 9.0, 16.0;
  const MatX L = cholesky_factor(MatX(d.asDiagonal()));
  CHECK(L(0, 0) == doctest::Approx(2.0));
  CHECK(L(1, 1) == doctest::Approx(3.0));
  CHECK(L(2, 2) == doctest::Approx(4.0));

  RngStream rng(3);
  MatX g(20, 20);
  for (Index r = 0; r < 20; ++r)
    for (Index c = 0; c < 20; ++c) g(r, c) = rng.next_normal();
  const MatX spd = g * g.transpose() + 0.5 * MatX::Identity(20, 20);
  const MatX l = cholesky_factor(spd);
  CHECK((l * l.transpose() - spd).norm() <= 1e-10 * spd.norm());

  VecX bad(2);
  bad << 1.0, -1.0;
  CHECK_THROWS_AS(cholesky_factor(MatX(bad.asDiagonal())), NumericFailure);
}

TEST_CASE("weighted squared norm") {
  const Covariance id = Covariance::isotropic(3, 1.0);
  CHECK(weighted_sq_norm(VecX::Zero(3), id) == 0.0);
  VecX r(3);
  r << 1.0, 2.0, 2.0;  // ||r||_2 = 3
  CHECK(weighted_sq_norm(r, id) == doctest::Approx(9.0));
  const Covariance small = Covariance::isotropic(3, 0.01);
  VecX unit(3);
  unit << 1.0, 0.0, 0.0;
  CHECK(weighted_sq_norm(unit, small) == doctest::Approx(100.0));
  // dense representation agrees with the diagonal one
  const Covariance dense = Covariance::dense(MatX(0.01 * MatX::Identity(3, 3)));
  CHECK(weighted_sq_norm(r, dense) == doctest::Approx(weighted_sq_norm(r, small)));
}

TEST_CASE("gaussian logpdf anchors") {
  const Covariance one = Covariance::isotropic(1, 1.0);
  VecX y(1), m(1);
  y << 0.3;
  m << 0.3;
  CHECK(gaussian_logpdf(y, m, one) ==
        doctest::Approx(-0.91893853320467274178).epsilon(1e-14));
  m << -0.7;  // residual 1
  CHECK(gaussian_logpdf(y, m, one) ==
        doctest::Approx(-1.4189385332046727418).epsilon(1e-14));
}

TEST_CASE("gaussian logpdf against a long-double oracle") {
  RngStream rng(29);
  const Index N = 20;
  VecX d(N), y(N), m(N);
  for (Index i = 0; i < N; ++i) {
    d(i) = 0.05 + rng.next_double();
    y(i) = rng.next_normal();
    m(i) = rng.next_normal();
  }
  const double got = gaussian_logpdf(y, m, Covariance::diagonal(d));
  long double quad = 0.0L, logdet = 0.0L;
  for (Index i = 0; i < N; ++i) {
    const long double r = static_cast<long double>(y(i)) - m(i);
    quad += r * r / static_cast<long double>(d(i));
    logdet += std::log(static_cast<long double>(d(i)));
  }
  const long double log2pi = 1.83787706640934548356065947281L;
  const long double want = -0.5L * (quad + N * log2pi + logdet);
  CHECK(got == doctest::Approx(static_cast<double>(want)).epsilon(1e-13));
}

TEST_CASE("gaussian density integrates to one on a 1-d grid") {
  const Covariance c = Covariance::isotropic(1, 0.7);
  VecX mean(1);
  mean << 0.4;
  const double sigma = std::sqrt(0.7);
  const int steps = 20000;
  const double lo = 0.4 - 10 * sigma, hi = 0.4 + 10 * sigma;
  const double dx = (hi - lo) / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    VecX x(1);
    x << lo + i * dx;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    integral += w * std::exp(gaussian_logpdf(x, mean, c)) * dx;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian sampling") {
  VecX mean(2);
  mean << 3.0, -1.0;
  RngStream rng(41);
  // zero covariance returns the mean exactly
  CHECK(gaussian_sample(mean, Covariance::isotropic(2, 0.0), rng) == mean);

  MatX sigma(2, 2);
  sigma << 2.0, 0.5, 0.5, 1.0;
  const Covariance cov = Covariance::dense(sigma);
  const int m = 100000;
  MatX sum2 = MatX::Zero(2, 2);
  VecX sum = VecX::Zero(2);
  RngStream draw(4242);
  for (int i = 0; i < m; ++i) {
    const VecX x = gaussian_sample(mean, cov, draw);
    sum += x;
    sum2 += (x - mean) * (x - mean).transpose();
  }
  const MatX emp = sum2 / m;
  for (Index r = 0; r < 2; ++r)
    for (Index c = 0; c < 2; ++c) {
      const double se = std::sqrt(
          (sigma(r, r) * sigma(c, c) + sigma(r, c) * sigma(r, c)) / m);
      CHECK(std::abs(emp(r, c) - sigma(r, c)) < 3.0 * se);
    }
  // determinism under the same stream state
  RngStream s1(7), s2(7);
  CHECK(gaussian_sample(mean, cov, s1) == gaussian_sample(mean, cov, s2));
}

TEST_CASE("log_sum_exp") {
  VecX v(3);
  v << 1.0, 2.0, 3.0;
  const double direct = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  CHECK(log_sum_exp(v) == doctest::Approx(direct).epsilon(1e-14));
  // shift invariance far outside double range
  const VecX shifted = v.array() + 5000.0;
  CHECK(log_sum_exp(shifted) == doctest::Approx(direct + 5000.0).epsilon(1e-12));
  VecX ninf = VecX::Constant(2, -std::numeric_limits<double>::infinity());
  CHECK(log_sum_exp(ninf) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("chi-square quantiles match reference values") {
  CHECK(chi_square_quantile(1, 0.95) ==
        doctest::Approx(3.84145882069412).epsilon(1e-9));
  CHECK(chi_square_quantile(10, 0.5) ==
        doctest::Approx(9.34181776559197).epsilon(1e-9));
  CHECK(chi_square_quantile(20, 0.999) ==
        doctest::Approx(45.3147466181259).epsilon(1e-9));
  CHECK(chi_square_quantile(8, 0.999) ==
        doctest::Approx(26.1244815583761).epsilon(1e-9));
  CHECK(chi_square_quantile(2, 0.999) ==
        doctest::Approx(13.8155105579643).epsilon(1e-9));
  CHECK(chi_square_quantile(30, 0.999) ==
        doctest::Approx(59.7030643044299).epsilon(1e-9));
  CHECK(chi_square_quantile(5, 0.01) ==
        doctest::Approx(0.554298076728277).epsilon(1e-9));
}

TEST_SUITE_END();

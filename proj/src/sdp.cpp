#include "ncpf/sdp.hpp"

#include <cmath>
#include <fstream>

namespace ncpf {

namespace {

void validate(const SdpProblem& p) {
  const Index d = p.lifted_dim();
  require(p.y.size() == p.phi.measurement_dim, "sdp: y length mismatch");
  require(p.R.size() == p.y.size(), "sdp: R dimension mismatch");
  require(p.lambda >= 0.0 && p.mu >= 0.0, "sdp: weights must be nonnegative");
  for (const auto& [r, c] : p.zero_mask) {
    require(r >= 0 && r < d && c >= 0 && c < d, "sdp: mask entry out of range");
    require(!(r == 0 && c == 0), "sdp: mask may not cover the fixed corner");
  }
}

void impose_affine(const SdpProblem& p, MatX& w) {
  w(0, 0) = 1.0;
  for (const auto& [r, c] : p.zero_mask) {
    w(r, c) = 0.0;
    w(c, r) = 0.0;
  }
}

// Projection onto {PSD} ∩ {corner/mask entries} by alternation, ending on the
// affine overwrite so masked entries and the corner are exact.
MatX project_constraints(const SdpProblem& p, MatX w, int max_alternations) {
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  for (int it = 0; it < max_alternations; ++it) {
    const MatX prev = w;
    w = psd_project(w);
    impose_affine(p, w);
    if ((w - prev).cwiseAbs().maxCoeff() <= 1e-13 * scale) break;
  }
  return w;
}

MatX soft_threshold(const MatX& v, double kappa) {
  return v.unaryExpr([kappa](double x) {
    const double m = std::abs(x) - kappa;
    return m > 0.0 ? (x < 0.0 ? -m : m) : 0.0;
  });
}

}  // namespace

double sdp_objective(const SdpProblem& p, const Eigen::Ref<const MatX>& X) {
  double obj = X.trace();
  if (p.lambda > 0.0)
    obj += p.lambda * p.R.quad_form_inv(p.y - apply_H(p.phi, X));
  if (p.mu > 0.0) obj += p.mu * X.cwiseAbs().sum();
  return obj;
}

SdpSolution solve_sdp(const SdpProblem& p, const SolverOptions& opts) {
  validate(p);
  const Index d = p.lifted_dim();
  const bool use_l1 = p.mu > 0.0;
  const int blocks = use_l1 ? 3 : 2;
  const double alpha = opts.over_relaxation;

  double rho = opts.rho;
  MatX z = MatX::Zero(d, d);
  z(0, 0) = 1.0;
  std::vector<MatX> x(static_cast<std::size_t>(blocks), z);
  std::vector<MatX> u(static_cast<std::size_t>(blocks), MatX::Zero(d, d));

  // constant parts of the quadratic block's normal equations
  const VecX rinv_y = p.R.solve(p.y);
  const MatX grad_const =
      MatX::Identity(d, d) - 2.0 * p.lambda * apply_H_adjoint(p.phi, rinv_y);

  // A(X) = rho X + 2 lambda H*(R^-1 H(X))
  auto apply_normal = [&](const MatX& m, double rho_now) {
    MatX out = rho_now * m;
    if (p.lambda > 0.0)
      out += 2.0 * p.lambda *
             apply_H_adjoint(p.phi, p.R.solve(apply_H(p.phi, m)));
    return out;
  };

  auto cg_solve = [&](const MatX& rhs, MatX guess, double rho_now) {
    MatX r = rhs - apply_normal(guess, rho_now);
    MatX dir = r;
    double rr = r.squaredNorm();
    const double stop = opts.cg_tol * std::max(1e-300, rhs.squaredNorm());
    for (int it = 0; it < opts.max_cg_iterations && rr > stop; ++it) {
      const MatX adir = apply_normal(dir, rho_now);
      const double denom = dir.cwiseProduct(adir).sum();
      if (denom <= 0.0) break;
      const double step = rr / denom;
      guess += step * dir;
      r -= step * adir;
      const double rr_new = r.squaredNorm();
      dir = r + (rr_new / rr) * dir;
      rr = rr_new;
    }
    return guess;
  };

  std::ofstream trace;
  if (opts.trace) trace.open(opts.trace_path);
  if (trace.is_open()) trace << "iteration,primal_residual,dual_residual,objective\n";

  SolveStats stats;
  const double dim_scale = std::sqrt(static_cast<double>(blocks)) * d;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const MatX z_prev = z;

    // block 0: quadratic (trace + data term)
    x[0] = cg_solve(rho * (z - u[0]) - grad_const, x[0], rho);
    // block 1: l1
    if (use_l1) x[1] = soft_threshold(z - u[1], p.mu / rho);
    // last block: constraint set
    const std::size_t cb = static_cast<std::size_t>(blocks - 1);
    x[cb] = project_constraints(p, z - u[cb], opts.max_projection_alternations);

    z.setZero();
    for (int b = 0; b < blocks; ++b) {
      const MatX relaxed = alpha * x[static_cast<std::size_t>(b)] +
                           (1.0 - alpha) * z_prev;
      z += relaxed + u[static_cast<std::size_t>(b)];
    }
    z /= static_cast<double>(blocks);
    double pri_sq = 0.0, u_sq = 0.0, x_sq = 0.0;
    for (int b = 0; b < blocks; ++b) {
      const MatX relaxed = alpha * x[static_cast<std::size_t>(b)] +
                           (1.0 - alpha) * z_prev;
      u[static_cast<std::size_t>(b)] += relaxed - z;
      pri_sq += (x[static_cast<std::size_t>(b)] - z).squaredNorm();
      u_sq += u[static_cast<std::size_t>(b)].squaredNorm();
      x_sq += x[static_cast<std::size_t>(b)].squaredNorm();
    }
    const double r_pri = std::sqrt(pri_sq);
    const double r_dual =
        rho * std::sqrt(static_cast<double>(blocks)) * (z - z_prev).norm();
    stats.iterations = it + 1;
    stats.primal_residual = r_pri;
    stats.dual_residual = r_dual;
    if (trace.is_open())
      trace << it << ',' << r_pri << ',' << r_dual << ','
            << sdp_objective(p, x[cb]) << '\n';

    const double eps_pri =
        dim_scale * opts.eps_abs +
        opts.eps_rel * std::max(std::sqrt(x_sq),
                                std::sqrt(static_cast<double>(blocks)) * z.norm());
    const double eps_dual =
        dim_scale * opts.eps_abs + opts.eps_rel * rho * std::sqrt(u_sq);
    if (r_pri <= eps_pri && r_dual <= eps_dual) {
      stats.converged = true;
      break;
    }

    // penalty adaptation keeps the residuals balanced; u is the scaled dual
    if (r_pri > 10.0 * r_dual && rho * 2.0 <= opts.rho_max) {
      rho *= 2.0;
      for (auto& ui : u) ui /= 2.0;
    } else if (r_dual > 10.0 * r_pri && rho / 2.0 >= opts.rho_min) {
      rho /= 2.0;
      for (auto& ui : u) ui *= 2.0;
    }
  }

  // tight final projection so the returned iterate is feasible
  MatX sol = project_constraints(p, z, 100);
  stats.objective = sdp_objective(p, sol);
  return SdpSolution{std::move(sol), stats};
}

}  // namespace ncpf

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ncpf/lifting.hpp"
#include "ncpf/numerics.hpp"
#include "ncpf/types.hpp"

namespace ncpf {

/// min  Tr(X) + lambda (y - H(X))^T R^-1 (y - H(X)) + mu ||X||_1
/// s.t. X PSD, X(0,0) = 1, X[p] = 0 for p in zero_mask.
struct SdpProblem {
  PhiOperator phi;
  VecX y;
  Covariance R;
  double lambda = 1.0;
  double mu = 0.0;
  std::vector<std::pair<Index, Index>> zero_mask;

  Index lifted_dim() const { return phi.lifted_dim(); }
};

struct SolverOptions {
  int max_iterations = 2000;
  double eps_abs = 1e-6;
  double eps_rel = 1e-5;
  double rho = 1.0;             // initial penalty
  double rho_min = 1e-3;
  double rho_max = 1e6;
  double over_relaxation = 1.0;  // alpha in [1, 1.8]
  int max_projection_alternations = 10;
  int max_cg_iterations = 50;
  double cg_tol = 1e-12;
  bool trace = false;            // per-iteration residual CSV
  std::string trace_path;
};

struct SolveStats {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  bool converged = false;
};

struct SdpSolution {
  LiftedMatrix X;
  SolveStats stats;
};

SdpSolution solve_sdp(const SdpProblem& problem, const SolverOptions& opts = {});

double sdp_objective(const SdpProblem& problem, const Eigen::Ref<const MatX>& X);

}  // namespace ncpf

#pragma once

#include <limits>
#include <vector>

#include "ncpf/model.hpp"
#include "ncpf/sdp.hpp"

namespace ncpf {

struct QbpOptions {
  double rank1_threshold = 0.1;   // sigma2/sigma1 accepted as rank one
  int max_lambda_retries = 3;     // halvings when the solution is not rank 1
  double mu = 0.1;                // l1 weight for full QBP
  double support_abs_threshold = 1e-3;
  double support_rel_threshold = 0.01;  // fraction of ||x||_inf
  SolverOptions solver;
  int threads = 1;
};

/// Mask entries that force the off-support block of X to zero except the
/// diagonal entry of candidate j (lifted index j+1).
std::vector<std::pair<Index, Index>> masked_entries(const SupportMask& support,
                                                    Index candidate);

struct MaskedSdpResult {
  LiftedMatrix X;     // full (n+1)x(n+1), zeros outside the allowed pattern
  double cost = std::numeric_limits<double>::infinity();
  SolveStats stats;
};

/// c(j): restricted SDP allowing one extra support element j. Solved on the
/// lifted rows/cols of {corner, support, j}; positive semidefiniteness forces
/// every other row to zero, so the reduced problem is exactly the masked one.
MaskedSdpResult solve_masked_sdp(const PhiOperator& phi, const VecX& y,
                                 const SupportMask& support, Index candidate,
                                 double lambda, const Covariance& R,
                                 const SolverOptions& opts = {});

struct CandidateSweepResult {
  VecX costs;           // c(j); +inf for on-support or failed candidates
  Index best_index = -1;
  LiftedMatrix X;       // solution at the best candidate
  VecX state;
  double rank1_ratio = 1.0;
  double lambda_used = 0.0;
};

CandidateSweepResult detect_support_candidate(const PhiOperator& phi,
                                              const VecX& y,
                                              const SupportMask& support,
                                              double lambda,
                                              const Covariance& R,
                                              const QbpOptions& opts = {});

struct QbpResult {
  VecX x;               // thresholded sparse estimate
  SupportMask support;
  LiftedMatrix X;
  double rank1_ratio = 1.0;
  double lambda_used = 0.0;
  SolveStats stats;
};

/// Full quadratic basis pursuit: trace + l1 relaxation without support
/// restriction; used for initialization and the per-step NLCS baseline.
QbpResult qbp_full(const PhiOperator& phi, const VecX& y, double lambda,
                   double mu, const Covariance& R, const QbpOptions& opts = {});

}  // namespace ncpf

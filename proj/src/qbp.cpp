#include "ncpf/qbp.hpp"

#include <algorithm>
#include <cmath>

#include "ncpf/parallel.hpp"

namespace ncpf {

std::vector<std::pair<Index, Index>> masked_entries(const SupportMask& support,
                                                    Index candidate) {
  std::vector<std::pair<Index, Index>> mask;
  const Index n = support.size();
  std::vector<Index> off;
  for (Index i = 0; i < n; ++i)
    if (!support.is_active(i)) off.push_back(i + 1);
  for (Index r : off)
    for (Index c : off)
      if (!(r == candidate + 1 && c == candidate + 1) && r <= c)
        mask.emplace_back(r, c);
  return mask;
}

MaskedSdpResult solve_masked_sdp(const PhiOperator& phi, const VecX& y,
                                 const SupportMask& support, Index candidate,
                                 double lambda, const Covariance& R,
                                 const SolverOptions& opts) {
  require(support.size() == phi.state_dim, "solve_masked_sdp: mask size");
  require(candidate >= 0 && candidate < phi.state_dim,
          "solve_masked_sdp: candidate out of range");
  require(!support.is_active(candidate),
          "solve_masked_sdp: candidate already in the support");

  std::vector<Index> keep;
  keep.push_back(0);
  for (Index i = 0; i < support.size(); ++i)
    if (support.is_active(i) || i == candidate) keep.push_back(i + 1);

  SdpProblem reduced;
  reduced.phi = restrict_phi(phi, keep);
  reduced.y = y;
  reduced.R = R;
  reduced.lambda = lambda;
  reduced.mu = 0.0;

  SdpSolution sol = solve_sdp(reduced, opts);

  MaskedSdpResult out;
  out.stats = sol.stats;
  const Index d = phi.lifted_dim();
  out.X = MatX::Zero(d, d);
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < keep.size(); ++c)
      out.X(keep[r], keep[c]) = sol.X(static_cast<Index>(r),
                                      static_cast<Index>(c));
  if (sol.stats.converged) out.cost = sol.stats.objective;
  return out;
}

CandidateSweepResult detect_support_candidate(const PhiOperator& phi,
                                              const VecX& y,
                                              const SupportMask& support,
                                              double lambda,
                                              const Covariance& R,
                                              const QbpOptions& opts) {
  const Index n = phi.state_dim;
  std::vector<Index> candidates;
  for (Index j = 0; j < n; ++j)
    if (!support.is_active(j)) candidates.push_back(j);
  require(!candidates.empty(),
          "detect_support_candidate: no off-support index left");

  CandidateSweepResult result;
  double lam = lambda;
  for (int attempt = 0; attempt <= opts.max_lambda_retries; ++attempt) {
    VecX costs = VecX::Constant(n, std::numeric_limits<double>::infinity());
    std::vector<MaskedSdpResult> solved(candidates.size());
    parallel_for(static_cast<Index>(candidates.size()), opts.threads,
                 [&](Index c) {
                   solved[static_cast<std::size_t>(c)] = solve_masked_sdp(
                       phi, y, support, candidates[static_cast<std::size_t>(c)],
                       lam, R, opts.solver);
                 });
    Index best = -1;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      costs(candidates[c]) = solved[c].cost;
      if (std::isfinite(solved[c].cost) &&
          (best < 0 || solved[c].cost < costs(candidates[static_cast<std::size_t>(best)])))
        best = static_cast<Index>(c);
    }
    if (best < 0) throw DetectionFailure("candidate sweep: every solve failed");

    const MaskedSdpResult& winner = solved[static_cast<std::size_t>(best)];
    const ExtractedState ex = extract_state(winner.X);
    result.costs = costs;
    result.best_index = candidates[static_cast<std::size_t>(best)];
    result.X = winner.X;
    result.state = ex.x;
    result.rank1_ratio = ex.rank1_ratio;
    result.lambda_used = lam;
    if (ex.rank1_ratio <= opts.rank1_threshold) break;
    lam /= 2.0;
  }
  return result;
}

QbpResult qbp_full(const PhiOperator& phi, const VecX& y, double lambda,
                   double mu, const Covariance& R, const QbpOptions& opts) {
  SdpProblem problem;
  problem.phi = phi;
  problem.y = y;
  problem.R = R;
  problem.mu = mu;

  QbpResult out;
  double lam = lambda;
  for (int attempt = 0; attempt <= opts.max_lambda_retries; ++attempt) {
    problem.lambda = lam;
    SdpSolution sol = solve_sdp(problem, opts.solver);
    if (!sol.stats.converged && attempt < opts.max_lambda_retries) {
      lam /= 2.0;
      continue;
    }
    const ExtractedState ex = extract_state(sol.X);
    out.X = std::move(sol.X);
    out.stats = sol.stats;
    out.x = ex.x;
    out.rank1_ratio = ex.rank1_ratio;
    out.lambda_used = lam;
    if (ex.rank1_ratio <= opts.rank1_threshold) break;
    lam /= 2.0;
  }
  if (!out.stats.converged)
    throw NumericFailure("qbp_full: solver did not converge");

  const Index n = phi.state_dim;
  const double cut = std::max(opts.support_abs_threshold,
                              opts.support_rel_threshold *
                                  out.x.cwiseAbs().maxCoeff());
  SupportMask support(n);
  for (Index i = 0; i < n; ++i)
    if (std::abs(out.x(i)) > cut) support.set(i, true);
  out.x = support.apply(out.x);
  out.support = support;
  return out;
}

}  // namespace ncpf

#pragma once

#include <vector>

#include "ncpf/filter.hpp"
#include "ncpf/particle_filter.hpp"

namespace ncpf {

struct BaselineResult {
  std::vector<VecX> estimates;
  std::vector<SupportMask> supports;  // per-step estimated support
  std::vector<FilterEvent> events;
  double wall_seconds = 0.0;
  int failure_count = 0;
};

enum class PfInit { oracle_state, distribution };

/// Plain SIR particle filter over all n coordinates (support fixed to
/// all-ones); `oracle_state` starts every particle at x1.
BaselineResult run_full_pf(const QuadraticMeasurementModel& model,
                           const ProcessModel& process,
                           const std::vector<VecX>& measurements,
                           Index particle_count, PfInit init, const VecX& x1,
                           const RngStream& base,
                           ResampleScheme scheme = ResampleScheme::systematic,
                           int threads = 1, const CloudFn& snapshot = {});

/// QBP applied independently at every step; no state carried between steps.
BaselineResult run_nlcs_per_step(const QuadraticMeasurementModel& model,
                                 const std::vector<VecX>& measurements,
                                 double lambda, double mu,
                                 const QbpOptions& opts = {}, int threads = 1);

}  // namespace ncpf

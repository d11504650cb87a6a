#pragma once

#include "ncpf/model.hpp"
#include "ncpf/rng.hpp"
#include "ncpf/types.hpp"

namespace ncpf {

enum class CloudKind { predicted, filtered };
enum class ResampleScheme { systematic, multinomial };

/// Weighted particle set over the active support. Values are stored densely
/// as one k x M matrix (k = support cardinality); off-support coordinates are
/// exactly zero by construction.
struct ParticleCloud {
  SupportMask support;
  MatX values;   // k x M
  VecX weights;  // M, nonnegative, sums to one
  int t = 1;
  CloudKind kind = CloudKind::predicted;

  Index particle_count() const { return weights.size(); }
  VecX densify(Index particle) const;
};

/// Particles diag(s0) z with z ~ p0 and uniform weights. Draws are keyed per
/// (particle, coordinate) so different supports share coordinate draws.
ParticleCloud init_cloud(const SupportMask& s0, const GaussianDensity& p0,
                         Index particle_count, const RngStream& base);

/// Weight update w_i ∝ N(y; h(x_i), R) w_i, in log space with max
/// subtraction. Throws DegeneracyError when every likelihood vanishes.
ParticleCloud measurement_update(const ParticleCloud& predicted, const VecX& y,
                                 const QuadraticMeasurementModel& model,
                                 int threads = 1);

/// Normalized exp(logw - logsumexp(logw)); shift invariant.
VecX normalize_log_weights(const Eigen::Ref<const VecX>& logw);

ParticleCloud resample(const ParticleCloud& filtered, RngStream rng,
                       ResampleScheme scheme = ResampleScheme::systematic);

/// x_i <- diag(support)(g(x_i, t) + v_i), weights carried over, t advanced.
ParticleCloud time_update(const ParticleCloud& filtered,
                          const ProcessModel& process,
                          const SupportMask& support, const RngStream& step_rng,
                          int threads = 1);

/// Weighted mean embedded in R^n (exactly zero off support).
VecX posterior_mean(const ParticleCloud& cloud);

double effective_sample_size(const ParticleCloud& cloud);

/// Support surgery: added coordinates are filled with independent p0
/// marginal draws, removed coordinates are dropped; weights untouched.
ParticleCloud apply_support_change(const ParticleCloud& cloud,
                                   const SupportMask& new_support,
                                   const GaussianDensity& p0,
                                   const RngStream& base);

}  // namespace ncpf

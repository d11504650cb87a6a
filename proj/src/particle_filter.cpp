#include "ncpf/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncpf/numerics.hpp"
#include "ncpf/parallel.hpp"

namespace ncpf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_cloud(const ParticleCloud& c) {
  require(c.particle_count() >= 1, "particle cloud: at least one particle");
  require(c.values.rows() == c.support.cardinality() &&
              c.values.cols() == c.particle_count(),
          "particle cloud: storage shape mismatch");
}

}  // namespace

VecX ParticleCloud::densify(Index particle) const {
  VecX out = VecX::Zero(support.size());
  const auto active = support.active_indices();
  for (Index r = 0; r < static_cast<Index>(active.size()); ++r)
    out(active[static_cast<std::size_t>(r)]) = values(r, particle);
  return out;
}

ParticleCloud init_cloud(const SupportMask& s0, const GaussianDensity& p0,
                         Index particle_count, const RngStream& base) {
  require(particle_count >= 1, "init_cloud: M >= 1");
  require(s0.size() == p0.dim(), "init_cloud: dimension mismatch");
  ParticleCloud cloud;
  cloud.support = s0;
  cloud.weights = VecX::Constant(particle_count, 1.0 / particle_count);
  cloud.t = 1;
  cloud.kind = CloudKind::predicted;
  const auto active = s0.active_indices();
  const Index k = static_cast<Index>(active.size());
  cloud.values.resize(k, particle_count);
  const bool marginal = p0.cov.is_diagonal();
  for (Index i = 0; i < particle_count; ++i) {
    RngStream rng = base.fork(kRngPfInit, static_cast<std::uint64_t>(i));
    if (marginal) {
      for (Index r = 0; r < k; ++r) {
        const Index c = active[static_cast<std::size_t>(r)];
        cloud.values(r, i) =
            p0.sample_marginal_at(c, rng, static_cast<std::uint64_t>(c));
      }
    } else {
      const VecX z = p0.sample(rng);
      for (Index r = 0; r < k; ++r)
        cloud.values(r, i) = z(active[static_cast<std::size_t>(r)]);
    }
  }
  return cloud;
}

VecX normalize_log_weights(const Eigen::Ref<const VecX>& logw) {
  const double lse = log_sum_exp(logw);
  if (!std::isfinite(lse))
    throw DegeneracyError(
        "measurement update: total likelihood vanished in log domain");
  return (logw.array() - lse).exp();
}

ParticleCloud measurement_update(const ParticleCloud& predicted, const VecX& y,
                                 const QuadraticMeasurementModel& model,
                                 int threads) {
  check_cloud(predicted);
  require(predicted.kind == CloudKind::predicted,
          "measurement_update: predicted cloud expected");
  require(y.size() == model.measurement_dim(),
          "measurement_update: measurement length mismatch");
  const Index M = predicted.particle_count();
  const RestrictedModel rm = restrict_model(model, predicted.support);
  const double log_norm =
      -0.5 * (model.measurement_dim() * kLog2Pi + model.R.log_det());
  const bool diag = model.R.is_diagonal();
  const VecX rdiag = diag ? model.R.diagonal_entries() : VecX();

  VecX logw(M);
  const Index chunk = 4096;
  const Index chunks = (M + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](Index ci) {
    const Index begin = ci * chunk;
    const Index len = std::min(chunk, M - begin);
    const MatX hv =
        eval_measurement_batch(rm, predicted.values.middleCols(begin, len));
    for (Index i = 0; i < len; ++i) {
      const VecX r = y - hv.col(i);
      const double quad = diag ? (r.array().square() / rdiag.array()).sum()
                               : model.R.quad_form_inv(r);
      logw(begin + i) = log_norm - 0.5 * quad;
    }
  });
  logw += predicted.weights.array().log().matrix();

  ParticleCloud out = predicted;
  out.kind = CloudKind::filtered;
  out.weights = normalize_log_weights(logw);
  return out;
}

ParticleCloud resample(const ParticleCloud& filtered, RngStream rng,
                       ResampleScheme scheme) {
  check_cloud(filtered);
  require(filtered.kind == CloudKind::filtered,
          "resample: filtered cloud expected");
  const Index M = filtered.particle_count();
  std::vector<Index> picks(static_cast<std::size_t>(M));
  if (scheme == ResampleScheme::systematic) {
    const double u0 = rng.next_double() / static_cast<double>(M);
    double cum = filtered.weights(0);
    Index j = 0;
    for (Index i = 0; i < M; ++i) {
      const double pos = u0 + static_cast<double>(i) / static_cast<double>(M);
      while (cum < pos && j + 1 < M) cum += filtered.weights(++j);
      picks[static_cast<std::size_t>(i)] = j;
    }
  } else {
    VecX cdf(M);
    double cum = 0.0;
    for (Index i = 0; i < M; ++i) {
      cum += filtered.weights(i);
      cdf(i) = cum;
    }
    for (Index i = 0; i < M; ++i) {
      const double u = rng.next_double() * cum;
      const Index j = static_cast<Index>(
          std::lower_bound(cdf.data(), cdf.data() + M, u) - cdf.data());
      picks[static_cast<std::size_t>(i)] = std::min(j, M - 1);
    }
  }
  ParticleCloud out = filtered;
  for (Index i = 0; i < M; ++i)
    out.values.col(i) = filtered.values.col(picks[static_cast<std::size_t>(i)]);
  out.weights.setConstant(1.0 / static_cast<double>(M));
  return out;
}

ParticleCloud time_update(const ParticleCloud& filtered,
                          const ProcessModel& process,
                          const SupportMask& support, const RngStream& step_rng,
                          int threads) {
  check_cloud(filtered);
  require(filtered.kind == CloudKind::filtered,
          "time_update: filtered cloud expected");
  require(support.size() == filtered.support.size(),
          "time_update: mask dimension mismatch");
  const Index M = filtered.particle_count();
  const auto active = support.active_indices();
  const Index k = static_cast<Index>(active.size());
  const bool diag_noise = process.process_noise.is_diagonal();

  ParticleCloud out;
  out.support = support;
  out.weights = filtered.weights;
  out.t = filtered.t + 1;
  out.kind = CloudKind::predicted;
  out.values.resize(k, M);

  const bool fast = process.transition_is_identity &&
                    support == filtered.support && diag_noise;
  parallel_for(M, threads, [&](Index i) {
    RngStream rng = step_rng.fork(kRngPfNoise, static_cast<std::uint64_t>(i));
    if (fast) {
      for (Index r = 0; r < k; ++r) {
        const Index c = active[static_cast<std::size_t>(r)];
        out.values(r, i) =
            filtered.values(r, i) +
            process.process_noise.marginal_std(c) *
                rng.normal_at(static_cast<std::uint64_t>(c));
      }
      return;
    }
    const VecX g = process.transition(filtered.densify(i), filtered.t);
    if (diag_noise) {
      for (Index r = 0; r < k; ++r) {
        const Index c = active[static_cast<std::size_t>(r)];
        out.values(r, i) = g(c) + process.process_noise.marginal_std(c) *
                                      rng.normal_at(static_cast<std::uint64_t>(c));
      }
    } else {
      const VecX v = process.process_noise.sample(rng);
      for (Index r = 0; r < k; ++r) {
        const Index c = active[static_cast<std::size_t>(r)];
        out.values(r, i) = g(c) + v(c);
      }
    }
  });
  return out;
}

VecX posterior_mean(const ParticleCloud& cloud) {
  check_cloud(cloud);
  VecX out = VecX::Zero(cloud.support.size());
  const auto active = cloud.support.active_indices();
  const VecX mean_active = cloud.values * cloud.weights;
  for (Index r = 0; r < static_cast<Index>(active.size()); ++r)
    out(active[static_cast<std::size_t>(r)]) = mean_active(r);
  return out;
}

double effective_sample_size(const ParticleCloud& cloud) {
  check_cloud(cloud);
  return 1.0 / cloud.weights.squaredNorm();
}

ParticleCloud apply_support_change(const ParticleCloud& cloud,
                                   const SupportMask& new_support,
                                   const GaussianDensity& p0,
                                   const RngStream& base) {
  check_cloud(cloud);
  require(new_support.size() == cloud.support.size(),
          "apply_support_change: mask dimension mismatch");
  if (new_support == cloud.support) return cloud;

  const Index M = cloud.particle_count();
  const auto old_active = cloud.support.active_indices();
  const auto new_active = new_support.active_indices();
  const Index k = static_cast<Index>(new_active.size());

  // map each new row to the old row of the same coordinate, or -1 for births
  std::vector<Index> from(static_cast<std::size_t>(k), -1);
  for (Index r = 0; r < k; ++r) {
    const auto it = std::find(old_active.begin(), old_active.end(),
                              new_active[static_cast<std::size_t>(r)]);
    if (it != old_active.end())
      from[static_cast<std::size_t>(r)] =
          static_cast<Index>(it - old_active.begin());
  }

  ParticleCloud out = cloud;
  out.support = new_support;
  out.values.resize(k, M);
  for (Index r = 0; r < k; ++r) {
    const Index src = from[static_cast<std::size_t>(r)];
    if (src >= 0) {
      out.values.row(r) = cloud.values.row(src);
      continue;
    }
    const Index c = new_active[static_cast<std::size_t>(r)];
    for (Index i = 0; i < M; ++i) {
      RngStream rng = base.fork(kRngPfRebirth, static_cast<std::uint64_t>(i));
      out.values(r, i) =
          p0.sample_marginal_at(c, rng, static_cast<std::uint64_t>(c));
    }
  }
  return out;
}

}  // namespace ncpf

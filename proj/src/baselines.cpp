#include "ncpf/baselines.hpp"

#include <chrono>

#include "ncpf/lifting.hpp"
#include "ncpf/parallel.hpp"

namespace ncpf {

BaselineResult run_full_pf(const QuadraticMeasurementModel& model,
                           const ProcessModel& process,
                           const std::vector<VecX>& measurements,
                           Index particle_count, PfInit init, const VecX& x1,
                           const RngStream& base, ResampleScheme scheme,
                           int threads, const CloudFn& snapshot) {
  require(!measurements.empty(), "run_full_pf: no measurements");
  require(particle_count >= 1, "run_full_pf: M >= 1");
  const auto start = std::chrono::steady_clock::now();
  const Index n = model.state_dim();
  const SupportMask all = SupportMask::ones(n);

  BaselineResult out;
  out.estimates.reserve(measurements.size());

  ParticleCloud cloud;
  if (init == PfInit::oracle_state) {
    require(x1.size() == n, "run_full_pf: oracle state dimension mismatch");
    cloud.support = all;
    cloud.values = x1.replicate(1, particle_count);
    cloud.weights = VecX::Constant(particle_count, 1.0 / particle_count);
    cloud.t = 1;
    cloud.kind = CloudKind::predicted;
  } else {
    cloud = init_cloud(all, process.initial_dist, particle_count, base);
  }

  for (std::size_t step = 0; step < measurements.size(); ++step) {
    const int t = cloud.t;
    ParticleCloud filtered;
    try {
      filtered = measurement_update(cloud, measurements[step], model, threads);
    } catch (const DegeneracyError&) {
      filtered = cloud;
      filtered.kind = CloudKind::filtered;
      filtered.weights.setConstant(1.0 / cloud.particle_count());
      out.events.push_back(
          {t, EventKind::degeneracy, -1, 0.0, 0, false, "uniform reweight"});
    }
    if (snapshot) snapshot(t, filtered);
    out.estimates.push_back(posterior_mean(filtered));
    out.supports.push_back(all);
    if (step + 1 == measurements.size()) break;
    const auto tkey = static_cast<std::uint64_t>(t);
    const ParticleCloud resampled =
        resample(filtered, base.fork(kRngPfResample, tkey), scheme);
    cloud = time_update(resampled, process, all, base.fork(kRngPfNoise, tkey),
                        threads);
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

BaselineResult run_nlcs_per_step(const QuadraticMeasurementModel& model,
                                 const std::vector<VecX>& measurements,
                                 double lambda, double mu,
                                 const QbpOptions& opts, int threads) {
  require(!measurements.empty(), "run_nlcs_per_step: no measurements");
  const auto start = std::chrono::steady_clock::now();
  const PhiOperator phi = lift_model(model);
  const Index n = model.state_dim();
  const std::size_t T = measurements.size();

  std::vector<VecX> estimates(T);
  std::vector<SupportMask> supports(T, SupportMask(n));
  std::vector<char> failed(T, 0);
  parallel_for(static_cast<Index>(T), threads, [&](Index i) {
    try {
      const QbpResult q =
          qbp_full(phi, measurements[static_cast<std::size_t>(i)], lambda, mu,
                   model.R, opts);
      estimates[static_cast<std::size_t>(i)] = q.x;
      supports[static_cast<std::size_t>(i)] = q.support;
    } catch (const Error&) {
      failed[static_cast<std::size_t>(i)] = 1;
    }
  });

  BaselineResult out;
  out.estimates.resize(T);
  out.supports.resize(T);
  VecX last = VecX::Zero(n);
  SupportMask last_support(n);
  for (std::size_t i = 0; i < T; ++i) {
    if (failed[i]) {
      // per-step solve failed: hold the previous estimate and flag it
      out.failure_count += 1;
      out.events.push_back({static_cast<int>(i + 1), EventKind::degeneracy, -1,
                            0.0, 0, false, "qbp solve failed; held previous"});
      out.estimates[i] = last;
      out.supports[i] = last_support;
      continue;
    }
    out.estimates[i] = estimates[i];
    out.supports[i] = supports[i];
    last = estimates[i];
    last_support = supports[i];
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

}  // namespace ncpf

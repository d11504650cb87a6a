#include "ncpf/filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ncpf/lifting.hpp"
#include "ncpf/numerics.hpp"

namespace ncpf {

double default_epsilon(const ProcessModel& process) {
  double vmax = 0.0;
  for (Index i = 0; i < process.dim(); ++i)
    vmax = std::max(vmax, process.process_noise.variance(i));
  return 3.0 * std::sqrt(vmax);
}

void HistoryBuffer::push(Snapshot s) {
  if (!buffer_.empty())
    require(s.t == buffer_.back().t + 1, "history: snapshot times contiguous");
  buffer_.push_back(std::move(s));
  while (static_cast<int>(buffer_.size()) > capacity_) buffer_.pop_front();
}

void HistoryBuffer::overwrite(const Snapshot& s) {
  for (auto& entry : buffer_)
    if (entry.t == s.t) {
      entry = s;
      return;
    }
  throw ContractViolation("history: no snapshot to overwrite at that time");
}

void HistoryBuffer::drop_from(int t) {
  while (!buffer_.empty() && buffer_.back().t >= t) buffer_.pop_back();
}

const Snapshot& HistoryBuffer::at_time(int t) const {
  for (const auto& entry : buffer_)
    if (entry.t == t) return entry;
  throw ContractViolation("history: no snapshot at that time");
}

bool check_add_trigger(const VecX& y, const VecX& x_hat,
                       const QuadraticMeasurementModel& model,
                       const NcpfConfig& config) {
  const double resid =
      weighted_sq_norm(y - eval_measurement(model, x_hat), model.R);
  const double threshold = chi_square_quantile(
      static_cast<double>(model.measurement_dim()), config.trigger_quantile);
  return resid > threshold;
}

namespace {

struct MeasurementPass {
  ParticleCloud filtered;
  VecX x_hat;
  double residual = 0.0;
  double log_likelihood = 0.0;
  bool degenerate = false;
};

MeasurementPass process_measurement(FilterState& st, const VecX& y,
                                    const QuadraticMeasurementModel& model,
                                    const NcpfConfig& config) {
  MeasurementPass pass;
  try {
    pass.filtered = measurement_update(st.cloud, y, model, config.threads);
  } catch (const DegeneracyError&) {
    pass.degenerate = true;
    pass.filtered = st.cloud;
    pass.filtered.kind = CloudKind::filtered;
    pass.filtered.weights.setConstant(1.0 / st.cloud.particle_count());
  }
  pass.x_hat = posterior_mean(pass.filtered);
  const VecX fitted = eval_measurement(model, pass.x_hat);
  pass.residual = weighted_sq_norm(y - fitted, model.R);
  pass.log_likelihood = gaussian_logpdf(y, fitted, model.R);
  return pass;
}

void update_tracker(std::vector<int>& tracker, const SupportMask& support,
                    const VecX& x_hat, double epsilon, int cap) {
  for (Index i = 0; i < support.size(); ++i) {
    auto& count = tracker[static_cast<std::size_t>(i)];
    if (!support.is_active(i)) {
      count = 0;
      continue;
    }
    count = std::abs(x_hat(i)) <= epsilon ? std::min(count + 1, cap) : 0;
  }
}

void advance(FilterState& st, const ParticleCloud& filtered,
             const ProcessModel& process, const NcpfConfig& config) {
  const auto tkey = static_cast<std::uint64_t>(st.t);
  const ParticleCloud resampled =
      resample(filtered, st.base.fork(kRngPfResample, tkey),
               config.resample_scheme);
  st.cloud = time_update(resampled, process, st.support,
                         st.base.fork(kRngPfNoise, tkey), config.threads);
  st.t += 1;
}

void emit_step(const EmitFn& emit, const CloudFn& snapshot,
               const FilterState& st, int t, const MeasurementPass& pass,
               const ParticleCloud& filtered) {
  if (snapshot) snapshot(t, filtered);
  if (!emit) return;
  StepOutput out;
  out.t = t;
  out.estimate = pass.x_hat;
  out.support = st.support;
  out.diag = {t, pass.log_likelihood, pass.residual,
              effective_sample_size(filtered)};
  emit(out);
}

// One measurement pass in replay mode: no support commits, counting goes on.
void replay_step(FilterState& st, const VecX& y,
                 const QuadraticMeasurementModel& model,
                 const ProcessModel& process, const NcpfConfig& config,
                 const EmitFn& emit, const CloudFn& snapshot) {
  const int t = st.t;
  st.history.overwrite({t, st.cloud, st.support, st.tracker, st.base, y});
  MeasurementPass pass = process_measurement(st, y, model, config);
  if (pass.degenerate)
    st.events.push_back(
        {t, EventKind::degeneracy, -1, 0.0, 0, true, "uniform reweight"});
  update_tracker(st.tracker, st.support, pass.x_hat, config.epsilon,
                 config.delta_t);
  emit_step(emit, snapshot, st, t, pass, pass.filtered);
  advance(st, pass.filtered, process, config);
}

}  // namespace

void ncpf_rollback(FilterState& st, const SupportMask& new_support,
                   const QuadraticMeasurementModel& model,
                   const PhiOperator& phi, const ProcessModel& process,
                   const NcpfConfig& config, const EmitFn& emit,
                   const CloudFn& snapshot) {
  (void)phi;
  require(st.history.size() >= 1, "rollback: empty history");
  const int t_orig = st.t;
  const Snapshot& oldest = st.history.front();
  const int target = oldest.t;

  st.events.push_back({t_orig, EventKind::rollback, -1, 0.0, target, false,
                       ""});

  // surgery on the oldest predictive cloud
  const RngStream rebirth =
      st.base.fork(kRngPfRebirth, static_cast<std::uint64_t>(target));
  ParticleCloud cloud = apply_support_change(oldest.cloud, new_support,
                                             process.initial_dist, rebirth);
  std::vector<int> tracker = oldest.tracker;
  for (Index i = 0; i < new_support.size(); ++i) {
    const bool was = oldest.support.is_active(i);
    const bool now = new_support.is_active(i);
    if (was != now) tracker[static_cast<std::size_t>(i)] = 0;
  }

  std::vector<VecX> replay_ys;
  for (int tau = target; tau < t_orig; ++tau)
    replay_ys.push_back(st.history.at_time(tau).y);

  st.cloud = std::move(cloud);
  st.support = new_support;
  st.tracker = std::move(tracker);
  st.t = target;

  for (const VecX& y : replay_ys)
    replay_step(st, y, model, process, config, emit, snapshot);
  // state is now the predictive distribution for t_orig under new_support
}

FilterState ncpf_initialize(const VecX& y1,
                            const QuadraticMeasurementModel& model,
                            const PhiOperator& phi, const ProcessModel& process,
                            const NcpfConfig& config, const RngStream& base) {
  require(config.particle_count >= 1, "ncpf: M >= 1");
  require(config.delta_t >= 1, "ncpf: delta_t >= 1");
  require(config.epsilon > 0.0, "ncpf: epsilon > 0");
  require(config.trigger_quantile > 0.0 && config.trigger_quantile < 1.0,
          "ncpf: trigger quantile in (0,1)");
  const Index n = model.state_dim();

  FilterState st;
  st.base = base;
  st.history = HistoryBuffer(config.delta_t + 1);
  SupportMask s0(n);
  if (config.oracle_init_support) {
    require(config.oracle_init_support->size() == n,
            "ncpf: oracle support dimension mismatch");
    s0 = *config.oracle_init_support;
  } else if (config.init_with_qbp) {
    try {
      const QbpResult q =
          qbp_full(phi, y1, config.lambda, config.qbp.mu, model.R, config.qbp);
      s0 = q.support;
    } catch (const Error&) {
      st.init_fallback = true;  // empty support; the trigger will recover
    }
  }
  st.support = s0;
  st.tracker.assign(static_cast<std::size_t>(n), 0);
  st.cloud = init_cloud(s0, process.initial_dist, config.particle_count,
                        st.base);
  st.t = 1;
  return st;
}

void ncpf_step(FilterState& st, const VecX& y,
               const QuadraticMeasurementModel& model, const PhiOperator& phi,
               const ProcessModel& process, const NcpfConfig& config,
               const EmitFn& emit, const CloudFn& snapshot) {
  require(y.size() == model.measurement_dim(), "ncpf_step: y length");
  const int t = st.t;
  st.history.drop_from(t);
  st.history.push({t, st.cloud, st.support, st.tracker, st.base, y});

  MeasurementPass pass = process_measurement(st, y, model, config);
  if (pass.degenerate)
    st.events.push_back(
        {t, EventKind::degeneracy, -1, 0.0, 0, false, "uniform reweight"});

  // Step 2: additions, gated by the likelihood trigger
  Index add_index = -1;
  double add_cost = 0.0;
  if (st.cooldown == 0 && pass.residual >
      chi_square_quantile(static_cast<double>(model.measurement_dim()),
                          config.trigger_quantile)) {
    FilterEvent trigger{t, EventKind::trigger, -1, pass.residual, 0, false, ""};
    if (st.support.cardinality() < st.support.size()) {
      try {
        const CandidateSweepResult sweep = detect_support_candidate(
            phi, y, st.support, config.lambda, model.R, config.qbp);
        add_index = sweep.best_index;
        add_cost = sweep.costs(sweep.best_index);
      } catch (const DetectionFailure&) {
        trigger.note = "sweep failed";
      }
    } else {
      trigger.note = "support full";
    }
    st.events.push_back(trigger);
  }

  // Step 3: removal marking
  update_tracker(st.tracker, st.support, pass.x_hat, config.epsilon,
                 config.delta_t);
  std::vector<Index> removals;
  for (Index i = 0; i < st.support.size(); ++i)
    if (st.support.is_active(i) &&
        st.tracker[static_cast<std::size_t>(i)] >= config.delta_t)
      removals.push_back(i);

  emit_step(emit, snapshot, st, t, pass, pass.filtered);

  // Step 4
  if (add_index >= 0 || !removals.empty()) {
    SupportMask ns = st.support;
    for (Index i : removals) {
      ns.set(i, false);
      st.events.push_back({t, EventKind::remove, i, 0.0, 0, false, ""});
    }
    if (add_index >= 0) {
      ns.set(add_index, true);
      st.events.push_back(
          {t, EventKind::add, add_index, add_cost, 0, false, ""});
    }
    ncpf_rollback(st, ns, model, phi, process, config, emit, snapshot);
    st.cooldown = config.trigger_cooldown;
    return;  // still at time t; the caller feeds y(t) again
  }

  advance(st, pass.filtered, process, config);
  if (st.cooldown > 0) st.cooldown -= 1;
}

RunResult run_ncpf(const QuadraticMeasurementModel& model,
                   const ProcessModel& process,
                   const std::vector<VecX>& measurements,
                   const NcpfConfig& config, const RngStream& base,
                   const CloudFn& snapshot) {
  require(!measurements.empty(), "run_ncpf: no measurements");
  const auto start = std::chrono::steady_clock::now();
  const PhiOperator phi = lift_model(model);
  const int T = static_cast<int>(measurements.size());

  RunResult rr;
  rr.estimates.assign(measurements.size(), VecX::Zero(model.state_dim()));
  rr.supports.assign(measurements.size(), SupportMask(model.state_dim()));
  rr.per_step.assign(measurements.size(), StepDiagnostics{});
  const EmitFn emit = [&](const StepOutput& o) {
    rr.estimates[static_cast<std::size_t>(o.t - 1)] = o.estimate;
    rr.supports[static_cast<std::size_t>(o.t - 1)] = o.support;
    rr.per_step[static_cast<std::size_t>(o.t - 1)] = o.diag;
  };

  FilterState st = ncpf_initialize(measurements.front(), model, phi, process,
                                   config, base);
  rr.init_fallback = st.init_fallback;
  int same_t_passes = 0;
  int last_t = 0;
  while (st.t <= T) {
    if (st.t == last_t) {
      if (++same_t_passes > 4 * static_cast<int>(model.state_dim()) + 8)
        throw NumericFailure("run_ncpf: support oscillation at one step");
    } else {
      same_t_passes = 0;
      last_t = st.t;
    }
    ncpf_step(st, measurements[static_cast<std::size_t>(st.t - 1)], model, phi,
              process, config, emit, snapshot);
  }
  rr.events = std::move(st.events);
  rr.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rr;
}

}  // namespace ncpf

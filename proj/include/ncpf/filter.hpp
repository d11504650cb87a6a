#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ncpf/particle_filter.hpp"
#include "ncpf/qbp.hpp"

namespace ncpf {

struct NcpfConfig {
  Index particle_count = 10000;
  double lambda = 1.0;         // SDP data weight
  int delta_t = 3;             // rollback window, also the removal count
  double epsilon = 0.3;        // zero bound for support removal
  double trigger_quantile = 0.999;  // chi-square quantile for the add trigger
  int trigger_cooldown = 0;    // steps without triggers after a commit
  ResampleScheme resample_scheme = ResampleScheme::systematic;
  QbpOptions qbp;              // sweep/initialization solver settings
  bool init_with_qbp = true;
  std::optional<SupportMask> oracle_init_support;
  int threads = 1;
};

/// Suggested removal bound: three process-noise standard deviations.
double default_epsilon(const ProcessModel& process);

enum class EventKind { trigger, add, remove, rollback, degeneracy };

struct FilterEvent {
  int t = 0;
  EventKind kind = EventKind::trigger;
  Index index = -1;     // element added/removed
  double value = 0.0;   // trigger residual, candidate cost, ...
  int target_t = 0;     // rollback destination
  bool replay = false;
  std::string note;
};

struct StepDiagnostics {
  int t = 0;
  double log_likelihood = 0.0;
  double residual = 0.0;  // ||y - h(xhat)||^2_R
  double ess = 0.0;
};

struct StepOutput {
  int t = 0;
  VecX estimate;
  SupportMask support;
  StepDiagnostics diag;
};

using EmitFn = std::function<void(const StepOutput&)>;

/// Optional hook receiving the filtered cloud of each processed step, used
/// for particle-density exports.
using CloudFn = std::function<void(int, const ParticleCloud&)>;

/// Snapshot of the predictive state right before a measurement is consumed;
/// rollback rebuilds the filter from the oldest one.
struct Snapshot {
  int t = 0;
  ParticleCloud cloud;  // predicted, t | t-1
  SupportMask support;
  std::vector<int> tracker;
  RngStream rng;
  VecX y;
};

class HistoryBuffer {
 public:
  HistoryBuffer() = default;
  explicit HistoryBuffer(int capacity) : capacity_(capacity) {}

  void push(Snapshot s);
  void overwrite(const Snapshot& s);  // replace the entry with the same time
  void drop_from(int t);              // remove entries with time >= t
  const Snapshot& front() const { return buffer_.front(); }
  const Snapshot& at_time(int t) const;
  std::size_t size() const { return buffer_.size(); }
  int capacity() const { return capacity_; }

 private:
  std::deque<Snapshot> buffer_;
  int capacity_ = 4;
};

struct FilterState {
  ParticleCloud cloud;  // predicted cloud for time t
  SupportMask support;
  std::vector<int> tracker;  // per-coordinate consecutive |xhat| <= eps count
  HistoryBuffer history;
  int t = 1;
  int cooldown = 0;
  RngStream base;  // never advanced; all draws are keyed forks
  std::vector<FilterEvent> events;
  bool init_fallback = false;
};

/// True when the weighted residual of y against h(x_hat) exceeds the
/// chi-square(N) quantile from the config.
bool check_add_trigger(const VecX& y, const VecX& x_hat,
                       const QuadraticMeasurementModel& model,
                       const NcpfConfig& config);

/// Step 0: support from full QBP on the first measurement (or an injected
/// oracle mask), particles from p0 masked by it.
FilterState ncpf_initialize(const VecX& y1,
                            const QuadraticMeasurementModel& model,
                            const PhiOperator& phi, const ProcessModel& process,
                            const NcpfConfig& config, const RngStream& base);

/// One filter step for measurement y(state.t). On a support change the state
/// is rolled back and replayed and returns still at time t (the caller feeds
/// y(t) again); otherwise time advances by one.
void ncpf_step(FilterState& state, const VecX& y,
               const QuadraticMeasurementModel& model, const PhiOperator& phi,
               const ProcessModel& process, const NcpfConfig& config,
               const EmitFn& emit = {}, const CloudFn& snapshot = {});

/// Support surgery on the oldest buffered predictive cloud followed by a
/// deterministic replay of the buffered measurements (add triggers
/// suppressed, removal counting continues). Leaves the state at the time it
/// had on entry, under the new support.
void ncpf_rollback(FilterState& state, const SupportMask& new_support,
                   const QuadraticMeasurementModel& model,
                   const PhiOperator& phi, const ProcessModel& process,
                   const NcpfConfig& config, const EmitFn& emit = {},
                   const CloudFn& snapshot = {});

struct RunResult {
  std::vector<VecX> estimates;          // x_hat(t), t = 1..T
  std::vector<SupportMask> supports;    // estimated support used at t
  std::vector<StepDiagnostics> per_step;
  std::vector<FilterEvent> events;
  double wall_seconds = 0.0;
  bool init_fallback = false;
};

RunResult run_ncpf(const QuadraticMeasurementModel& model,
                   const ProcessModel& process,
                   const std::vector<VecX>& measurements,
                   const NcpfConfig& config, const RngStream& base,
                   const CloudFn& snapshot = {});

}  // namespace ncpf

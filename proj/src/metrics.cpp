#include "ncpf/metrics.hpp"

#include <cmath>

namespace ncpf {

MetricsReport compute_metrics(const Trajectory& truth,
                              const std::vector<VecX>& estimates,
                              const std::vector<SupportMask>& est_supports,
                              double wall_seconds, int latency_cap) {
  const Index T = truth.length();
  require(T >= 1, "compute_metrics: empty trajectory");
  require(static_cast<Index>(estimates.size()) == T,
          "compute_metrics: estimate length mismatch");
  require(static_cast<Index>(est_supports.size()) == T,
          "compute_metrics: support length mismatch");
  const Index n = truth.states.front().size();

  MetricsReport report;
  report.wall_seconds = wall_seconds;
  report.precision_per_step.resize(T);
  report.recall_per_step.resize(T);
  report.f1_per_step.resize(T);

  double sq_total = 0.0;
  double sq_active = 0.0;
  Index active_count = 0;
  for (Index t = 0; t < T; ++t) {
    const VecX& x = truth.states[static_cast<std::size_t>(t)];
    const VecX& e = estimates[static_cast<std::size_t>(t)];
    require(e.size() == n, "compute_metrics: estimate dimension mismatch");
    const SupportMask& s = truth.supports[static_cast<std::size_t>(t)];
    const SupportMask& sh = est_supports[static_cast<std::size_t>(t)];
    Index tp = 0, fp = 0, fn = 0;
    for (Index i = 0; i < n; ++i) {
      const double d = e(i) - x(i);
      sq_total += d * d;
      if (s.is_active(i)) {
        sq_active += d * d;
        ++active_count;
      }
      if (s.is_active(i) && sh.is_active(i)) ++tp;
      if (!s.is_active(i) && sh.is_active(i)) ++fp;
      if (s.is_active(i) && !sh.is_active(i)) ++fn;
    }
    const double precision =
        (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
    const double recall =
        (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn);
    const double f1 = (precision + recall) == 0.0
                          ? 0.0
                          : 2.0 * precision * recall / (precision + recall);
    report.precision_per_step(t) = precision;
    report.recall_per_step(t) = recall;
    report.f1_per_step(t) = f1;
  }
  report.rmse_total = std::sqrt(sq_total / static_cast<double>(T * n));
  report.rmse_active =
      active_count == 0 ? 0.0
                        : std::sqrt(sq_active / static_cast<double>(active_count));
  report.active_coordinate_count = active_count;
  report.mean_precision = report.precision_per_step.mean();
  report.mean_recall = report.recall_per_step.mean();
  report.mean_f1 = report.f1_per_step.mean();

  // truth support-change events and how long the estimator took to follow
  for (Index t = 1; t < T; ++t) {
    const SupportMask& prev = truth.supports[static_cast<std::size_t>(t - 1)];
    const SupportMask& cur = truth.supports[static_cast<std::size_t>(t)];
    for (Index i = 0; i < n; ++i) {
      if (prev.is_active(i) == cur.is_active(i)) continue;
      SupportEventRecord rec;
      rec.t = static_cast<int>(t + 1);  // 1-based step of the change
      rec.index = i;
      rec.added = cur.is_active(i);
      rec.latency = -1;
      rec.missed = true;
      for (Index tau = t; tau < T && tau - t <= latency_cap; ++tau) {
        const bool est_active =
            est_supports[static_cast<std::size_t>(tau)].is_active(i);
        if (est_active == rec.added) {
          rec.latency = static_cast<int>(tau - t);
          rec.missed = false;
          break;
        }
      }
      report.events.push_back(rec);
    }
  }
  return report;
}

}  // namespace ncpf

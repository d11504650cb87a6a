#pragma once

#include <vector>

#include "ncpf/model.hpp"

namespace ncpf {

struct SupportEventRecord {
  int t = 0;         // time of the truth support change
  Index index = -1;
  bool added = true; // false: element left the truth support
  int latency = -1;  // steps until the estimate follows; -1 when missed
  bool missed = false;
};

struct MetricsReport {
  double rmse_total = 0.0;   // all coordinates
  double rmse_active = 0.0;  // coordinates truly nonzero at each step
  double mean_precision = 1.0;
  double mean_recall = 1.0;
  double mean_f1 = 1.0;
  VecX precision_per_step;
  VecX recall_per_step;
  VecX f1_per_step;
  std::vector<SupportEventRecord> events;
  double wall_seconds = 0.0;
  Index active_coordinate_count = 0;  // step-coordinates entering rmse_active
};

/// Metrics of an estimate sequence against the truth. Empty truth and
/// estimate supports count as a perfect step; rmse_active is zero when no
/// coordinate is ever active. Latencies above `latency_cap` are missed.
MetricsReport compute_metrics(const Trajectory& truth,
                              const std::vector<VecX>& estimates,
                              const std::vector<SupportMask>& est_supports,
                              double wall_seconds, int latency_cap = 10);

}  // namespace ncpf

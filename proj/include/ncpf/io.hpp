#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncpf/baselines.hpp"
#include "ncpf/filter.hpp"
#include "ncpf/metrics.hpp"
#include "ncpf/model.hpp"

namespace ncpf {

// ---- model serialization (versioned JSON, bit-exact for finite doubles) ----

std::string model_to_json(const QuadraticMeasurementModel& model);
QuadraticMeasurementModel model_from_json(const std::string& text);
void save_model(const std::string& path, const QuadraticMeasurementModel&);
QuadraticMeasurementModel load_model(const std::string& path);

// ---- scenario -------------------------------------------------------------

struct Scenario {
  int version = 1;
  std::string name;
  std::uint64_t seed = 1;
  Index n = 30;
  Index N = 20;
  Index T = 50;
  double measurement_noise = 0.01;  // isotropic variance of R
  double process_noise = 0.01;      // isotropic variance of v
  std::string support_dynamics = "flip";  // flip | markov | frozen
  double support_param = 0.03;
  std::vector<Index> s0;  // 1-based active indices at t=0; empty = all zero
  double p0_mean = 0.0;
  double p0_variance = 1.0;
  std::optional<std::string> model_file;

  // ncpf
  Index ncpf_particles = 10000;
  double lambda = 1.0;
  int delta_t = 3;
  double epsilon = 0.3;
  double trigger_quantile = 0.999;
  int trigger_cooldown = 0;
  std::string ncpf_init = "qbp";  // qbp | oracle
  std::string resample = "systematic";

  // baselines
  Index pf_particles = 10000;
  std::string pf_init = "oracle-state";  // oracle-state | distribution
  double nlcs_lambda = 1.0;
  double nlcs_mu = 0.1;

  int latency_cap = 10;
  int threads = 0;  // 0 = machine parallelism
};

/// Parses a scenario file; the NCPF_SEED environment variable, when set,
/// overrides the seed.
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario&);

struct ScenarioObjects {
  QuadraticMeasurementModel model;
  ProcessModel process;
  SupportDynamics dynamics;
  SupportMask s0;
};

/// Model (from file or drawn from the scenario seed), process and support
/// dynamics ready to run.
ScenarioObjects build_scenario_objects(const Scenario&);
NcpfConfig build_ncpf_config(const Scenario&, int threads);

// ---- CSV schemas ------------------------------------------------------------
// Indices in every file are 1-based.

/// header: t,kind,index,value with kind in {state, support, measurement}
void save_trajectory(const std::string& path, const Trajectory&);
Trajectory load_trajectory(const std::string& path, Index n, Index N);

/// header: t,index,estimate — one row per estimated-active index; absent
/// entries read back as zero, row presence defines the estimated support.
void save_estimates(const std::string& path, const std::vector<VecX>& estimates,
                    const std::vector<SupportMask>& supports);
void load_estimates(const std::string& path, Index T, Index n,
                    std::vector<VecX>& estimates,
                    std::vector<SupportMask>& supports);

/// header: particle_id,index,value,weight
void save_cloud(const std::string& path, const ParticleCloud&);

/// header: j,cost
void save_sweep(const std::string& path, const VecX& costs);

// ---- event log (line-delimited JSON) ---------------------------------------

std::string event_to_json(const FilterEvent&);
void save_events(const std::string& path, const std::vector<FilterEvent>&);

// ---- run metadata / metrics -------------------------------------------------

struct RunMeta {
  std::string method;
  double wall_seconds = 0.0;
  int failures = 0;
  Index steps = 0;
};

void save_timing(const std::string& path, const RunMeta& meta);
RunMeta load_timing(const std::string& path);

void save_metrics_csv(const std::string& path,
                      const std::vector<std::string>& methods,
                      const std::vector<MetricsReport>& reports);
std::string metrics_table(const std::vector<std::string>& methods,
                          const std::vector<MetricsReport>& reports);

// ---- helpers ----------------------------------------------------------------

std::string format_double(double v);  // %.17g, round-trip exact
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ncpf

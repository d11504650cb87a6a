// Benchmark harness: simulate trajectories, run NCPF and the two baselines,
// compare metrics, and emit figure-style SVG plots.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ncpf/baselines.hpp"
#include "ncpf/filter.hpp"
#include "ncpf/io.hpp"
#include "ncpf/metrics.hpp"
#include "ncpf/parallel.hpp"
#include "ncpf/plot.hpp"

namespace fs = std::filesystem;
using namespace ncpf;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

int pick_threads(const Scenario& scenario, int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (scenario.threads > 0) return scenario.threads;
  return default_thread_count();
}

QuadraticMeasurementModel model_for_run(const Scenario& scenario,
                                        const std::string& trajectory_path) {
  // prefer the model written next to the trajectory; fall back to the
  // scenario (same seed reproduces the same random model)
  const fs::path sibling = fs::path(trajectory_path).parent_path() / "model.json";
  if (fs::exists(sibling)) return load_model(sibling.string());
  return build_scenario_objects(scenario).model;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const Scenario scenario = load_scenario(scenario_path);
  ScenarioObjects obj = build_scenario_objects(scenario);
  const Trajectory traj =
      simulate(obj.model, obj.process, obj.dynamics, obj.s0, scenario.T,
               RngStream(scenario.seed));
  make_dir(out_dir);
  save_model((fs::path(out_dir) / "model.json").string(), obj.model);
  save_trajectory((fs::path(out_dir) / "trajectory.csv").string(), traj);
  std::cout << "simulated " << scenario.name << ": T=" << scenario.T
            << " n=" << scenario.n << " N=" << scenario.N << " seed="
            << scenario.seed << " -> " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& method, const std::string& scenario_path,
            const std::string& trajectory_path, const std::string& out_dir,
            int cli_threads, Index particles_override, bool snapshots) {
  const Scenario scenario = load_scenario(scenario_path);
  const int threads = pick_threads(scenario, cli_threads);
  const QuadraticMeasurementModel model =
      model_for_run(scenario, trajectory_path);
  const Trajectory traj =
      load_trajectory(trajectory_path, scenario.n, scenario.N);
  make_dir(out_dir);

  GaussianDensity p0{VecX::Constant(scenario.n, scenario.p0_mean),
                     Covariance::isotropic(scenario.n, scenario.p0_variance)};
  const ProcessModel process = ProcessModel::identity(
      Covariance::isotropic(scenario.n, scenario.process_noise), p0);

  CloudFn snapshot = {};
  if (snapshots)
    snapshot = [&](int t, const ParticleCloud& cloud) {
      save_cloud((fs::path(out_dir) / ("cloud_" + std::to_string(t) + ".csv"))
                     .string(),
                 cloud);
    };

  RunMeta meta;
  meta.method = method;
  meta.steps = traj.length();
  if (method == "ncpf") {
    NcpfConfig config = build_ncpf_config(scenario, threads);
    if (particles_override > 0) config.particle_count = particles_override;
    if (scenario.ncpf_init == "oracle")
      config.oracle_init_support = traj.supports.front();
    const RunResult rr = run_ncpf(model, process, traj.measurements, config,
                                  RngStream(scenario.seed, 1), snapshot);
    save_estimates((fs::path(out_dir) / "estimates.csv").string(),
                   rr.estimates, rr.supports);
    save_events((fs::path(out_dir) / "events.ndjson").string(), rr.events);
    meta.wall_seconds = rr.wall_seconds;
    if (rr.init_fallback) {
      meta.failures = 1;
      std::cerr << "warning: QBP initialization failed; started from the "
                   "empty support\n";
    }
  } else if (method == "pf") {
    const Index M =
        particles_override > 0 ? particles_override : scenario.pf_particles;
    const PfInit init = scenario.pf_init == "distribution"
                            ? PfInit::distribution
                            : PfInit::oracle_state;
    const BaselineResult br = run_full_pf(
        model, process, traj.measurements, M, init, traj.states.front(),
        RngStream(scenario.seed, 2), ResampleScheme::systematic, threads,
        snapshot);
    save_estimates((fs::path(out_dir) / "estimates.csv").string(),
                   br.estimates, br.supports);
    save_events((fs::path(out_dir) / "events.ndjson").string(), br.events);
    meta.wall_seconds = br.wall_seconds;
    meta.failures = br.failure_count;
  } else if (method == "nlcs") {
    QbpOptions opts;
    opts.threads = threads;
    const BaselineResult br =
        run_nlcs_per_step(model, traj.measurements, scenario.nlcs_lambda,
                          scenario.nlcs_mu, opts, threads);
    save_estimates((fs::path(out_dir) / "estimates.csv").string(),
                   br.estimates, br.supports);
    save_events((fs::path(out_dir) / "events.ndjson").string(), br.events);
    meta.wall_seconds = br.wall_seconds;
    meta.failures = br.failure_count;
  } else {
    throw ConfigError("unknown method: " + method);
  }
  save_timing((fs::path(out_dir) / "timing.json").string(), meta);
  std::cout << method << " finished in " << meta.wall_seconds << " s -> "
            << out_dir << "\n";
  return meta.failures > 0 && method != "ncpf" ? kExitNumeric : 0;
}

int cmd_compare(const std::string& scenario_path,
                const std::string& trajectory_path,
                const std::vector<std::string>& run_specs,
                const std::string& out_dir) {
  const Scenario scenario = load_scenario(scenario_path);
  const Trajectory traj =
      load_trajectory(trajectory_path, scenario.n, scenario.N);
  require(!run_specs.empty(), "compare: at least one run required");

  std::vector<std::string> methods;
  std::vector<MetricsReport> reports;
  for (const auto& spec : run_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw ConfigError("run spec must be name=dir: " + spec);
    const std::string name = spec.substr(0, eq);
    const std::string dir = spec.substr(eq + 1);
    const RunMeta meta = load_timing((fs::path(dir) / "timing.json").string());
    if (meta.steps != traj.length())
      throw ContractViolation("compare: run " + name +
                              " was produced from a different trajectory");
    std::vector<VecX> estimates;
    std::vector<SupportMask> supports;
    load_estimates((fs::path(dir) / "estimates.csv").string(), traj.length(),
                   scenario.n, estimates, supports);
    methods.push_back(name);
    reports.push_back(compute_metrics(traj, estimates, supports,
                                      meta.wall_seconds,
                                      scenario.latency_cap));
  }
  make_dir(out_dir);
  save_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), methods,
                   reports);
  const std::string table = metrics_table(methods, reports);
  write_text_file((fs::path(out_dir) / "report.txt").string(), table);
  std::cout << table;
  return 0;
}

int cmd_plot(const std::string& trajectory_path,
             const std::string& estimates_path,
             const std::string& snapshots_dir, std::vector<Index> indices,
             const std::string& out_dir, Index n_hint, Index N_hint) {
  const Trajectory traj = load_trajectory(trajectory_path, n_hint, N_hint);
  const Index T = traj.length();
  const Index n = n_hint;
  std::vector<VecX> estimates;
  std::vector<SupportMask> supports;
  load_estimates(estimates_path, T, n, estimates, supports);

  for (Index idx : indices)
    if (idx < 1 || idx > n) {
      std::string msg = "plot: index " + std::to_string(idx) +
                        " not available; valid indices are 1..";
      throw ConfigError(msg + std::to_string(n));
    }
  make_dir(out_dir);

  for (Index idx : indices) {
    std::vector<double> truth(static_cast<std::size_t>(T));
    std::vector<double> est(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
      truth[static_cast<std::size_t>(t)] =
          traj.states[static_cast<std::size_t>(t)](idx - 1);
      est[static_cast<std::size_t>(t)] =
          estimates[static_cast<std::size_t>(t)](idx - 1);
    }
    std::vector<DensityColumn> density;
    if (!snapshots_dir.empty()) {
      density.resize(static_cast<std::size_t>(T));
      for (Index t = 1; t <= T; ++t) {
        const fs::path file =
            fs::path(snapshots_dir) / ("cloud_" + std::to_string(t) + ".csv");
        if (!fs::exists(file)) continue;
        std::istringstream in(read_text_file(file.string()));
        std::string line;
        std::getline(in, line);  // header
        auto& col = density[static_cast<std::size_t>(t - 1)];
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          std::istringstream row(line);
          std::string pid, ridx, value, weight;
          std::getline(row, pid, ',');
          std::getline(row, ridx, ',');
          std::getline(row, value, ',');
          std::getline(row, weight, ',');
          if (std::stoll(ridx) != idx) continue;
          col.values.push_back(std::strtod(value.c_str(), nullptr));
          col.weights.push_back(std::strtod(weight.c_str(), nullptr));
        }
      }
    }
    const std::string file =
        (fs::path(out_dir) / ("state_" + std::to_string(idx) + ".svg")).string();
    write_state_plot_svg(file, idx, truth, est, density);
    std::cout << "wrote " << file << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlinear compressive particle filter benchmark"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, trajectory_path, method, estimates_path;
  std::string snapshots_dir;
  std::vector<std::string> run_specs;
  std::vector<Index> indices;
  int threads = 0;
  Index particles = 0;
  Index n_hint = 30, N_hint = 20;
  bool snapshots = false;

  auto* sim = app.add_subcommand("simulate", "simulate a scenario trajectory");
  sim->add_option("--scenario", scenario_path, "scenario json")->required();
  sim->add_option("--out", out_dir, "output directory")->required();

  auto* run = app.add_subcommand("run", "run an estimator on a trajectory");
  run->add_option("--method", method, "ncpf | pf | nlcs")->required();
  run->add_option("--scenario", scenario_path, "scenario json")->required();
  run->add_option("--trajectory", trajectory_path, "trajectory csv")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--threads", threads, "worker cap (0 = machine parallelism)");
  run->add_option("--particles", particles, "override particle count");
  run->add_flag("--snapshots", snapshots, "dump per-step particle clouds");

  auto* cmp = app.add_subcommand("compare", "metrics across completed runs");
  cmp->add_option("--scenario", scenario_path, "scenario json")->required();
  cmp->add_option("--trajectory", trajectory_path, "trajectory csv")->required();
  cmp->add_option("--run", run_specs, "name=dir of a completed run")
      ->required()
      ->take_all();
  cmp->add_option("--out", out_dir, "output directory")->required();

  auto* plt = app.add_subcommand("plot", "per-state SVG figures");
  plt->add_option("--trajectory", trajectory_path, "trajectory csv")->required();
  plt->add_option("--estimates", estimates_path, "estimate csv")->required();
  plt->add_option("--index", indices, "1-based state indices")
      ->required()
      ->take_all();
  plt->add_option("--snapshots", snapshots_dir, "cloud snapshot directory");
  plt->add_option("--out", out_dir, "output directory")->required();
  plt->add_option("--n", n_hint, "state dimension of the trajectory");
  plt->add_option("--N", N_hint, "measurement dimension of the trajectory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(scenario_path, out_dir);
    if (run->parsed())
      return cmd_run(method, scenario_path, trajectory_path, out_dir, threads,
                     particles, snapshots);
    if (cmp->parsed())
      return cmd_compare(scenario_path, trajectory_path, run_specs, out_dir);
    if (plt->parsed())
      return cmd_plot(trajectory_path, estimates_path, snapshots_dir, indices,
                      out_dir, n_hint, N_hint);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}

#include "ncpf/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ncpf {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// ---- model ------------------------------------------------------------------

std::string model_to_json(const QuadraticMeasurementModel& model) {
  json j;
  j["version"] = 1;
  j["n"] = model.state_dim();
  j["N"] = model.measurement_dim();
  j["a"] = std::vector<double>(model.a.data(), model.a.data() + model.a.size());
  json b = json::array();
  for (Index i = 0; i < model.b.rows(); ++i) {
    json row = json::array();
    for (Index c = 0; c < model.b.cols(); ++c) row.push_back(model.b(i, c));
    b.push_back(std::move(row));
  }
  j["b"] = std::move(b);
  json q = json::array();
  for (const auto& m : model.Q) {
    json mat = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      mat.push_back(std::move(row));
    }
    q.push_back(std::move(mat));
  }
  j["Q"] = std::move(q);
  if (model.R.is_diagonal()) {
    const VecX& d = model.R.diagonal_entries();
    j["R"] = {{"diag", std::vector<double>(d.data(), d.data() + d.size())}};
  } else {
    const MatX m = model.R.dense_matrix();
    json mat = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      mat.push_back(std::move(row));
    }
    j["R"] = {{"full", std::move(mat)}};
  }
  return j.dump(2);
}

QuadraticMeasurementModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model json: ") + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw ConfigError("model json: unsupported version");
  const Index n = j.at("n").get<Index>();
  const Index N = j.at("N").get<Index>();
  VecX a(N);
  const auto& ja = j.at("a");
  if (static_cast<Index>(ja.size()) != N) throw ConfigError("model json: a length");
  for (Index i = 0; i < N; ++i) a(i) = ja[static_cast<std::size_t>(i)].get<double>();
  MatX b(N, n);
  const auto& jb = j.at("b");
  for (Index i = 0; i < N; ++i)
    for (Index c = 0; c < n; ++c)
      b(i, c) = jb.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
  std::vector<MatX> q;
  const auto& jq = j.at("Q");
  for (Index i = 0; i < N; ++i) {
    MatX m(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c)
        m(r, c) = jq.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    q.push_back(std::move(m));
  }
  Covariance R;
  const auto& jr = j.at("R");
  if (jr.contains("diag")) {
    VecX d(N);
    for (Index i = 0; i < N; ++i) d(i) = jr["diag"].at(static_cast<std::size_t>(i)).get<double>();
    R = Covariance::diagonal(std::move(d));
  } else if (jr.contains("full")) {
    MatX m(N, N);
    for (Index r = 0; r < N; ++r)
      for (Index c = 0; c < N; ++c)
        m(r, c) = jr["full"].at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    R = Covariance::dense(std::move(m));
  } else {
    throw ConfigError("model json: R needs diag or full");
  }
  return QuadraticMeasurementModel(std::move(a), std::move(b), std::move(q),
                                   std::move(R));
}

void save_model(const std::string& path, const QuadraticMeasurementModel& m) {
  write_text_file(path, model_to_json(m) + "\n");
}

QuadraticMeasurementModel load_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

// ---- scenario ---------------------------------------------------------------

Scenario load_scenario(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  Scenario s;
  try {
    s.version = j.value("version", 1);
    if (s.version != 1) throw ConfigError("scenario: unsupported version");
    s.name = j.value("name", std::string("scenario"));
    s.seed = j.value("seed", std::uint64_t{1});
    s.n = j.value("n", Index{30});
    s.N = j.value("N", Index{20});
    s.T = j.value("T", Index{50});
    s.measurement_noise = j.value("measurement_noise", 0.01);
    s.process_noise = j.value("process_noise", 0.01);
    if (j.contains("support")) {
      const auto& sup = j["support"];
      s.support_dynamics = sup.value("dynamics", std::string("flip"));
      s.support_param = sup.value("param", 0.03);
      if (sup.contains("s0"))
        for (const auto& v : sup["s0"]) s.s0.push_back(v.get<Index>());
    }
    if (j.contains("p0")) {
      s.p0_mean = j["p0"].value("mean", 0.0);
      s.p0_variance = j["p0"].value("variance", 1.0);
    }
    if (j.contains("model_file") && !j["model_file"].is_null())
      s.model_file = j["model_file"].get<std::string>();
    if (j.contains("ncpf")) {
      const auto& f = j["ncpf"];
      s.ncpf_particles = f.value("M", Index{10000});
      s.lambda = f.value("lambda", 1.0);
      s.delta_t = f.value("delta_t", 3);
      s.epsilon = f.value("epsilon", 0.3);
      s.trigger_quantile = f.value("trigger_quantile", 0.999);
      s.trigger_cooldown = f.value("cooldown", 0);
      s.ncpf_init = f.value("init", std::string("qbp"));
      s.resample = f.value("resample", std::string("systematic"));
    }
    if (j.contains("pf")) {
      s.pf_particles = j["pf"].value("M", Index{10000});
      s.pf_init = j["pf"].value("init", std::string("oracle-state"));
    }
    if (j.contains("nlcs")) {
      s.nlcs_lambda = j["nlcs"].value("lambda", 1.0);
      s.nlcs_mu = j["nlcs"].value("mu", 0.1);
    }
    s.latency_cap = j.value("latency_cap", 10);
    s.threads = j.value("threads", 0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (const char* env = std::getenv("NCPF_SEED"))
    s.seed = std::strtoull(env, nullptr, 10);
  if (s.n < 1 || s.N < 1 || s.T < 1)
    throw ConfigError("scenario: dimensions must be positive");
  if (s.support_dynamics != "flip" && s.support_dynamics != "markov" &&
      s.support_dynamics != "frozen")
    throw ConfigError("scenario: unknown support dynamics");
  for (Index i : s.s0)
    if (i < 1 || i > s.n) throw ConfigError("scenario: s0 index out of range");
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["version"] = s.version;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["n"] = s.n;
  j["N"] = s.N;
  j["T"] = s.T;
  j["measurement_noise"] = s.measurement_noise;
  j["process_noise"] = s.process_noise;
  j["support"] = {{"dynamics", s.support_dynamics},
                  {"param", s.support_param},
                  {"s0", s.s0}};
  j["p0"] = {{"mean", s.p0_mean}, {"variance", s.p0_variance}};
  if (s.model_file) j["model_file"] = *s.model_file;
  j["ncpf"] = {{"M", s.ncpf_particles},
               {"lambda", s.lambda},
               {"delta_t", s.delta_t},
               {"epsilon", s.epsilon},
               {"trigger_quantile", s.trigger_quantile},
               {"cooldown", s.trigger_cooldown},
               {"init", s.ncpf_init},
               {"resample", s.resample}};
  j["pf"] = {{"M", s.pf_particles}, {"init", s.pf_init}};
  j["nlcs"] = {{"lambda", s.nlcs_lambda}, {"mu", s.nlcs_mu}};
  j["latency_cap"] = s.latency_cap;
  j["threads"] = s.threads;
  return j.dump(2);
}

ScenarioObjects build_scenario_objects(const Scenario& s) {
  const RngStream base(s.seed);
  QuadraticMeasurementModel model;
  if (s.model_file) {
    model = load_model(*s.model_file);
    if (model.state_dim() != s.n || model.measurement_dim() != s.N)
      throw ConfigError("scenario: model file dimensions disagree");
  } else {
    RngStream model_rng = base.fork(kRngModelGen);
    model = random_model(s.n, s.N, model_rng,
                         Covariance::isotropic(s.N, s.measurement_noise));
  }
  GaussianDensity p0{VecX::Constant(s.n, s.p0_mean),
                     Covariance::isotropic(s.n, s.p0_variance)};
  ProcessModel process = ProcessModel::identity(
      Covariance::isotropic(s.n, s.process_noise), std::move(p0));
  SupportDynamics dyn;
  if (s.support_dynamics == "flip")
    dyn = {SupportDynamicsKind::flip, s.support_param};
  else if (s.support_dynamics == "markov")
    dyn = {SupportDynamicsKind::markov, s.support_param};
  else
    dyn = {SupportDynamicsKind::frozen, 0.0};
  SupportMask s0(s.n);
  for (Index i : s.s0) s0.set(i - 1, true);
  return ScenarioObjects{std::move(model), std::move(process), dyn,
                         std::move(s0)};
}

NcpfConfig build_ncpf_config(const Scenario& s, int threads) {
  NcpfConfig c;
  c.particle_count = s.ncpf_particles;
  c.lambda = s.lambda;
  c.delta_t = s.delta_t;
  c.epsilon = s.epsilon;
  c.trigger_quantile = s.trigger_quantile;
  c.trigger_cooldown = s.trigger_cooldown;
  c.resample_scheme = s.resample == "multinomial" ? ResampleScheme::multinomial
                                                  : ResampleScheme::systematic;
  c.init_with_qbp = s.ncpf_init != "oracle";
  c.threads = threads;
  c.qbp.threads = threads;
  return c;
}

// ---- CSV --------------------------------------------------------------------

void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "t,kind,index,value\n";
  for (Index t = 0; t < traj.length(); ++t) {
    const auto& x = traj.states[static_cast<std::size_t>(t)];
    const auto& s = traj.supports[static_cast<std::size_t>(t)];
    const auto& y = traj.measurements[static_cast<std::size_t>(t)];
    for (Index i = 0; i < x.size(); ++i)
      out << (t + 1) << ",state," << (i + 1) << ',' << format_double(x(i))
          << '\n';
    for (Index i = 0; i < s.size(); ++i)
      out << (t + 1) << ",support," << (i + 1) << ','
          << (s.is_active(i) ? 1 : 0) << '\n';
    for (Index i = 0; i < y.size(); ++i)
      out << (t + 1) << ",measurement," << (i + 1) << ','
          << format_double(y(i)) << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

Trajectory load_trajectory(const std::string& path, Index n, Index N) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "t,kind,index,value")
    throw IoError("trajectory csv: bad header in " + path);
  Trajectory traj;
  auto ensure_step = [&](Index t) {
    while (traj.length() < t) {
      traj.states.emplace_back(VecX::Zero(n));
      traj.supports.emplace_back(SupportMask(n));
      traj.measurements.emplace_back(VecX::Zero(N));
    }
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw IoError("trajectory csv: bad row in " + path);
    const Index t = std::stoll(f[0]);
    const Index idx = std::stoll(f[2]) - 1;
    const double v = std::strtod(f[3].c_str(), nullptr);
    if (t < 1) throw IoError("trajectory csv: bad time");
    ensure_step(t);
    auto& step_states = traj.states[static_cast<std::size_t>(t - 1)];
    if (f[1] == "state") {
      if (idx < 0 || idx >= n) throw IoError("trajectory csv: state index");
      step_states(idx) = v;
    } else if (f[1] == "support") {
      if (idx < 0 || idx >= n) throw IoError("trajectory csv: support index");
      traj.supports[static_cast<std::size_t>(t - 1)].set(idx, v != 0.0);
    } else if (f[1] == "measurement") {
      if (idx < 0 || idx >= N) throw IoError("trajectory csv: measurement index");
      traj.measurements[static_cast<std::size_t>(t - 1)](idx) = v;
    } else {
      throw IoError("trajectory csv: unknown kind " + f[1]);
    }
  }
  if (traj.length() == 0) throw IoError("trajectory csv: empty " + path);
  return traj;
}

void save_estimates(const std::string& path,
                    const std::vector<VecX>& estimates,
                    const std::vector<SupportMask>& supports) {
  require(estimates.size() == supports.size(),
          "save_estimates: length mismatch");
  std::ostringstream out;
  out << "t,index,estimate\n";
  for (std::size_t t = 0; t < estimates.size(); ++t)
    for (Index i = 0; i < estimates[t].size(); ++i)
      if (supports[t].is_active(i))
        out << (t + 1) << ',' << (i + 1) << ','
            << format_double(estimates[t](i)) << '\n';
  write_text_file(path, out.str());
}

void load_estimates(const std::string& path, Index T, Index n,
                    std::vector<VecX>& estimates,
                    std::vector<SupportMask>& supports) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "t,index,estimate")
    throw IoError("estimate csv: bad header in " + path);
  estimates.assign(static_cast<std::size_t>(T), VecX::Zero(n));
  supports.assign(static_cast<std::size_t>(T), SupportMask(n));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw IoError("estimate csv: bad row in " + path);
    const Index t = std::stoll(f[0]);
    const Index idx = std::stoll(f[1]) - 1;
    if (t < 1 || t > T || idx < 0 || idx >= n)
      throw IoError("estimate csv: index out of range");
    estimates[static_cast<std::size_t>(t - 1)](idx) =
        std::strtod(f[2].c_str(), nullptr);
    supports[static_cast<std::size_t>(t - 1)].set(idx, true);
  }
}

void save_cloud(const std::string& path, const ParticleCloud& cloud) {
  std::ostringstream out;
  out << "particle_id,index,value,weight\n";
  const auto active = cloud.support.active_indices();
  for (Index i = 0; i < cloud.particle_count(); ++i)
    for (Index r = 0; r < static_cast<Index>(active.size()); ++r)
      out << (i + 1) << ',' << (active[static_cast<std::size_t>(r)] + 1) << ','
          << format_double(cloud.values(r, i)) << ','
          << format_double(cloud.weights(i)) << '\n';
  write_text_file(path, out.str());
}

void save_sweep(const std::string& path, const VecX& costs) {
  std::ostringstream out;
  out << "j,cost\n";
  for (Index j = 0; j < costs.size(); ++j)
    out << (j + 1) << ',' << format_double(costs(j)) << '\n';
  write_text_file(path, out.str());
}

// ---- events -----------------------------------------------------------------

namespace {

const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::trigger: return "trigger";
    case EventKind::add: return "add";
    case EventKind::remove: return "remove";
    case EventKind::rollback: return "rollback";
    case EventKind::degeneracy: return "degeneracy";
  }
  return "unknown";
}

}  // namespace

std::string event_to_json(const FilterEvent& e) {
  json payload = json::object();
  switch (e.kind) {
    case EventKind::trigger:
      payload["residual"] = e.value;
      break;
    case EventKind::add:
      payload["index"] = e.index + 1;
      payload["cost"] = e.value;
      break;
    case EventKind::remove:
      payload["index"] = e.index + 1;
      break;
    case EventKind::rollback:
      payload["target_t"] = e.target_t;
      break;
    case EventKind::degeneracy:
      break;
  }
  if (e.replay) payload["replay"] = true;
  if (!e.note.empty()) payload["note"] = e.note;
  json j = {{"t", e.t}, {"event", event_name(e.kind)}, {"payload", payload}};
  return j.dump();
}

void save_events(const std::string& path,
                 const std::vector<FilterEvent>& events) {
  std::ostringstream out;
  for (const auto& e : events) out << event_to_json(e) << '\n';
  write_text_file(path, out.str());
}

// ---- metadata / metrics -------------------------------------------------------

void save_timing(const std::string& path, const RunMeta& meta) {
  json j = {{"method", meta.method},
            {"wall_seconds", meta.wall_seconds},
            {"failures", meta.failures},
            {"steps", meta.steps}};
  write_text_file(path, j.dump(2) + "\n");
}

RunMeta load_timing(const std::string& path) {
  try {
    const json j = json::parse(read_text_file(path));
    RunMeta meta;
    meta.method = j.at("method").get<std::string>();
    meta.wall_seconds = j.at("wall_seconds").get<double>();
    meta.failures = j.value("failures", 0);
    meta.steps = j.value("steps", Index{0});
    return meta;
  } catch (const json::exception& e) {
    throw IoError(std::string("timing json: ") + e.what());
  }
}

namespace {

struct MetricRow {
  const char* name;
  double (*get)(const MetricsReport&);
};

double latency_mean(const MetricsReport& r) {
  double sum = 0.0;
  int count = 0;
  for (const auto& e : r.events)
    if (!e.missed) {
      sum += e.latency;
      ++count;
    }
  return count == 0 ? 0.0 : sum / count;
}

const MetricRow kRows[] = {
    {"rmse_total", [](const MetricsReport& r) { return r.rmse_total; }},
    {"rmse_active", [](const MetricsReport& r) { return r.rmse_active; }},
    {"mean_precision", [](const MetricsReport& r) { return r.mean_precision; }},
    {"mean_recall", [](const MetricsReport& r) { return r.mean_recall; }},
    {"mean_f1", [](const MetricsReport& r) { return r.mean_f1; }},
    {"support_events",
     [](const MetricsReport& r) { return static_cast<double>(r.events.size()); }},
    {"detected_events",
     [](const MetricsReport& r) {
       double c = 0;
       for (const auto& e : r.events) c += e.missed ? 0 : 1;
       return c;
     }},
    {"mean_detection_latency", latency_mean},
    {"wall_seconds", [](const MetricsReport& r) { return r.wall_seconds; }},
};

}  // namespace

void save_metrics_csv(const std::string& path,
                      const std::vector<std::string>& methods,
                      const std::vector<MetricsReport>& reports) {
  require(methods.size() == reports.size(), "metrics: size mismatch");
  std::ostringstream out;
  out << "metric";
  for (const auto& m : methods) out << ',' << m;
  out << '\n';
  for (const auto& row : kRows) {
    out << row.name;
    for (const auto& r : reports) out << ',' << format_double(row.get(r));
    out << '\n';
  }
  write_text_file(path, out.str());
}

std::string metrics_table(const std::vector<std::string>& methods,
                          const std::vector<MetricsReport>& reports) {
  require(methods.size() == reports.size(), "metrics: size mismatch");
  std::ostringstream out;
  out << "metric                  ";
  for (const auto& m : methods) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%14s", m.c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& row : kRows) {
    char name[32];
    std::snprintf(name, sizeof(name), "%-24s", row.name);
    out << name;
    for (const auto& r : reports) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%14.6g", row.get(r));
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace ncpf

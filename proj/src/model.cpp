#include "ncpf/model.hpp"

#include <cmath>
#include <utility>

namespace ncpf {

SupportMask SupportMask::ones(Index n) {
  return from_bits(VecI::Ones(n));
}

SupportMask SupportMask::from_indices(Index n,
                                      const std::vector<Index>& active) {
  SupportMask s(n);
  for (Index i : active) {
    require(i >= 0 && i < n, "SupportMask: index out of range");
    s.bits_(i) = 1;
  }
  return s;
}

SupportMask SupportMask::from_bits(VecI bits) {
  require((bits.array() == 0 || bits.array() == 1).all(),
          "SupportMask: entries must be 0 or 1");
  SupportMask s;
  s.bits_ = std::move(bits);
  return s;
}

std::vector<Index> SupportMask::active_indices() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(cardinality()));
  for (Index i = 0; i < bits_.size(); ++i)
    if (bits_(i)) out.push_back(i);
  return out;
}

SupportMask SupportMask::with(Index i) const {
  SupportMask s = *this;
  s.set(i, true);
  return s;
}

SupportMask SupportMask::without(Index i) const {
  SupportMask s = *this;
  s.set(i, false);
  return s;
}

VecX SupportMask::apply(const Eigen::Ref<const VecX>& x) const {
  require(x.size() == bits_.size(), "SupportMask::apply: dimension mismatch");
  return x.cwiseProduct(bits_.cast<double>());
}

QuadraticMeasurementModel::QuadraticMeasurementModel(VecX a_in, MatX b_in,
                                                     std::vector<MatX> q_in,
                                                     Covariance r_in)
    : a(std::move(a_in)), b(std::move(b_in)), Q(std::move(q_in)),
      R(std::move(r_in)) {
  const Index N = a.size();
  const Index n = b.cols();
  require(N >= 1 && n >= 1, "model: empty dimensions");
  require(b.rows() == N, "model: b must have one row per measurement");
  require(static_cast<Index>(Q.size()) == N,
          "model: one quadratic term per measurement");
  for (auto& q : Q) {
    require(q.rows() == n && q.cols() == n, "model: Q_i must be n x n");
    q = symmetrize(q);
  }
  require(R.size() == N, "model: R must be N x N");
}

VecX eval_measurement(const QuadraticMeasurementModel& model,
                      const Eigen::Ref<const VecX>& x) {
  require(x.size() == model.state_dim(),
          "eval_measurement: state dimension mismatch");
  const Index N = model.measurement_dim();
  VecX out = model.a + model.b * x;
  for (Index i = 0; i < N; ++i) out(i) += x.dot(model.Q[i] * x);
  return out;
}

VecX eval_measurement_on_support(const QuadraticMeasurementModel& model,
                                 const Eigen::Ref<const VecX>& x_values,
                                 const SupportMask& support) {
  require(support.size() == model.state_dim(),
          "eval_measurement_on_support: mask dimension mismatch");
  const auto active = support.active_indices();
  const Index k = static_cast<Index>(active.size());
  require(x_values.size() == k,
          "eval_measurement_on_support: values must match the active set");
  const Index N = model.measurement_dim();
  VecX out = model.a;
  for (Index c = 0; c < k; ++c)
    out += model.b.col(active[c]) * x_values(c);
  for (Index i = 0; i < N; ++i) {
    double quad = 0.0;
    for (Index r = 0; r < k; ++r)
      for (Index c = 0; c < k; ++c)
        quad += x_values(r) * model.Q[i](active[r], active[c]) * x_values(c);
    out(i) += quad;
  }
  return out;
}

RestrictedModel restrict_model(const QuadraticMeasurementModel& model,
                               const SupportMask& support) {
  require(support.size() == model.state_dim(),
          "restrict_model: mask dimension mismatch");
  const auto active = support.active_indices();
  const Index k = static_cast<Index>(active.size());
  const Index N = model.measurement_dim();
  RestrictedModel rm;
  rm.a = model.a;
  rm.k = k;
  rm.b_active.resize(N, k);
  rm.q_stack.resize(N * k, k);
  for (Index c = 0; c < k; ++c) rm.b_active.col(c) = model.b.col(active[c]);
  for (Index i = 0; i < N; ++i)
    for (Index r = 0; r < k; ++r)
      for (Index c = 0; c < k; ++c)
        rm.q_stack(i * k + r, c) = model.Q[i](active[r], active[c]);
  return rm;
}

MatX eval_measurement_batch(const RestrictedModel& rm,
                            const Eigen::Ref<const MatX>& values) {
  const Index N = rm.a.size();
  const Index k = rm.k;
  const Index M = values.cols();
  require(values.rows() == k, "eval_measurement_batch: row count mismatch");
  MatX out = rm.a.replicate(1, M);
  if (k == 0) return out;
  out.noalias() += rm.b_active * values;
  const MatX w = rm.q_stack * values;  // (N*k) x M
  for (Index i = 0; i < N; ++i)
    out.row(i) += (w.middleRows(i * k, k).cwiseProduct(values))
                      .colwise()
                      .sum();
  return out;
}

SupportMask step_support_flip(const SupportMask& s, double flip_prob,
                              RngStream& rng) {
  require(flip_prob >= 0.0 && flip_prob <= 1.0,
          "step_support_flip: probability in [0,1]");
  const double u = rng.next_double();
  if (u >= flip_prob) return s;
  const Index n = s.size();
  const Index pick = static_cast<Index>(rng.next_double() * n);
  const Index i = std::min(pick, n - 1);
  SupportMask out = s;
  out.set(i, !s.is_active(i));
  return out;
}

SupportMask step_support_markov(const SupportMask& s, double alpha,
                                RngStream& rng) {
  require(alpha >= 0.0 && alpha <= 1.0,
          "step_support_markov: probability in [0,1]");
  SupportMask out = s;
  for (Index i = 0; i < s.size(); ++i)
    if (rng.next_double() >= alpha) out.set(i, !s.is_active(i));
  return out;
}

ProcessModel ProcessModel::identity(Covariance noise, GaussianDensity p0) {
  ProcessModel pm;
  pm.transition = [](const VecX& x, int) { return x; };
  pm.transition_is_identity = true;
  pm.process_noise = std::move(noise);
  pm.initial_dist = std::move(p0);
  return pm;
}

ProcessModel ProcessModel::affine(MatX A, VecX c, Covariance noise,
                                  GaussianDensity p0) {
  require(A.rows() == A.cols() && A.rows() == c.size(),
          "ProcessModel::affine: dimension mismatch");
  ProcessModel pm;
  pm.transition = [A = std::move(A), c = std::move(c)](const VecX& x, int) {
    return VecX(A * x + c);
  };
  pm.process_noise = std::move(noise);
  pm.initial_dist = std::move(p0);
  return pm;
}

ProcessModel ProcessModel::custom(std::function<VecX(const VecX&, int)> g,
                                  Covariance noise, GaussianDensity p0) {
  ProcessModel pm;
  pm.transition = std::move(g);
  pm.process_noise = std::move(noise);
  pm.initial_dist = std::move(p0);
  return pm;
}

SupportMask SupportDynamics::step(const SupportMask& s, RngStream& rng) const {
  switch (kind) {
    case SupportDynamicsKind::flip:
      return step_support_flip(s, param, rng);
    case SupportDynamicsKind::markov:
      return step_support_markov(s, param, rng);
    case SupportDynamicsKind::frozen:
      return s;
  }
  throw ContractViolation("SupportDynamics: unknown kind");
}

Trajectory simulate(const QuadraticMeasurementModel& model,
                    const ProcessModel& process,
                    const SupportDynamics& dynamics, const SupportMask& s0,
                    Index steps, const RngStream& base) {
  require(steps >= 1, "simulate: at least one step");
  require(s0.size() == model.state_dim(), "simulate: mask dimension mismatch");
  require(process.dim() == model.state_dim(),
          "simulate: process dimension mismatch");
  Trajectory traj;
  traj.states.reserve(steps);
  traj.supports.reserve(steps);
  traj.measurements.reserve(steps);

  RngStream init_rng = base.fork(kRngSimInit);
  VecX x = s0.apply(process.initial_dist.sample(init_rng));
  SupportMask s = s0;
  for (Index t = 1; t <= steps; ++t) {
    RngStream meas_rng = base.fork(kRngSimMeasurement, static_cast<std::uint64_t>(t));
    VecX y = eval_measurement(model, x) + model.R.sample(meas_rng);
    traj.states.push_back(x);
    traj.supports.push_back(s);
    traj.measurements.push_back(std::move(y));
    if (t == steps) break;
    RngStream sup_rng = base.fork(kRngSimSupport, static_cast<std::uint64_t>(t));
    RngStream proc_rng = base.fork(kRngSimProcess, static_cast<std::uint64_t>(t));
    s = dynamics.step(s, sup_rng);
    x = s.apply(process.transition(x, static_cast<int>(t)) +
                process.process_noise.sample(proc_rng));
  }
  return traj;
}

QuadraticMeasurementModel random_model(Index n, Index N, RngStream& rng,
                                       Covariance R) {
  require(n >= 1 && N >= 1, "random_model: dimensions must be positive");
  VecX a(N);
  for (Index i = 0; i < N; ++i) a(i) = rng.next_normal();
  MatX b(N, n);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < n; ++j) b(i, j) = rng.next_normal();
  std::vector<MatX> Q(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) {
    MatX g(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) g(r, c) = rng.next_normal();
    Q[static_cast<std::size_t>(i)] = symmetrize(g);
  }
  if (R.size() == 0) R = Covariance::isotropic(N, 1.0);
  return QuadraticMeasurementModel(std::move(a), std::move(b), std::move(Q),
                                   std::move(R));
}

}  // namespace ncpf

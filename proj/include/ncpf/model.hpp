#pragma once

#include <functional>
#include <vector>

#include "ncpf/numerics.hpp"
#include "ncpf/rng.hpp"
#include "ncpf/types.hpp"

namespace ncpf {

/// Binary support mask s over the n state coordinates; value semantics.
class SupportMask {
 public:
  SupportMask() = default;
  explicit SupportMask(Index n) : bits_(VecI::Zero(n)) {}

  static SupportMask zeros(Index n) { return SupportMask(n); }
  static SupportMask ones(Index n);
  static SupportMask from_indices(Index n, const std::vector<Index>& active);
  static SupportMask from_bits(VecI bits);

  Index size() const { return bits_.size(); }
  Index cardinality() const { return bits_.sum(); }
  bool is_active(Index i) const { return bits_(i) != 0; }
  void set(Index i, bool active) { bits_(i) = active ? 1 : 0; }
  const VecI& bits() const { return bits_; }
  std::vector<Index> active_indices() const;

  SupportMask with(Index i) const;
  SupportMask without(Index i) const;

  /// diag(s) x
  VecX apply(const Eigen::Ref<const VecX>& x) const;

  bool operator==(const SupportMask& o) const { return bits_ == o.bits_; }
  bool operator!=(const SupportMask& o) const { return !(*this == o); }

 private:
  VecI bits_;
};

/// Family (a_i, b_i, Q_i, R): measurement i reads a_i + b_i^T x + x^T Q_i x
/// plus Gaussian noise with covariance R. Q_i is symmetrized at construction.
struct QuadraticMeasurementModel {
  VecX a;                // length N
  MatX b;                // N x n, row i holds b_i^T
  std::vector<MatX> Q;   // N symmetric n x n matrices
  Covariance R;          // N x N SPD

  QuadraticMeasurementModel() = default;
  QuadraticMeasurementModel(VecX a_in, MatX b_in, std::vector<MatX> q_in,
                            Covariance r_in);

  Index state_dim() const { return b.cols(); }
  Index measurement_dim() const { return a.size(); }
};

VecX eval_measurement(const QuadraticMeasurementModel& model,
                      const Eigen::Ref<const VecX>& x);

/// h evaluated from values given only on the active set. Cost O(N k^2).
VecX eval_measurement_on_support(const QuadraticMeasurementModel& model,
                                 const Eigen::Ref<const VecX>& x_values,
                                 const SupportMask& support);

/// Model restricted to a support: b columns and Q blocks for the active set,
/// with the Q blocks stacked (N*k) x k for batched evaluation.
struct RestrictedModel {
  VecX a;
  MatX b_active;   // N x k
  MatX q_stack;    // (N*k) x k
  Index k = 0;
};

RestrictedModel restrict_model(const QuadraticMeasurementModel& model,
                               const SupportMask& support);

/// h for M particles at once; `values` is k x M over the active set.
MatX eval_measurement_batch(const RestrictedModel& rm,
                            const Eigen::Ref<const MatX>& values);

/// Support dynamics of the benchmark: with probability flip_prob one
/// uniformly chosen element is toggled.
SupportMask step_support_flip(const SupportMask& s, double flip_prob,
                              RngStream& rng);

/// Independent per-element Markov chain: each bit kept with probability
/// alpha, toggled with probability 1 - alpha.
SupportMask step_support_markov(const SupportMask& s, double alpha,
                                RngStream& rng);

struct GaussianDensity {
  VecX mean;
  Covariance cov;

  Index dim() const { return mean.size(); }
  VecX sample(RngStream& rng) const { return gaussian_sample(mean, cov, rng); }
  double logpdf(const Eigen::Ref<const VecX>& x) const {
    return gaussian_logpdf(x, mean, cov);
  }
  double marginal_mean(Index i) const { return mean(i); }
  double marginal_std(Index i) const { return cov.marginal_std(i); }
  /// Draw from the marginal of coordinate i at a fixed counter slot.
  double sample_marginal_at(Index i, const RngStream& rng,
                            std::uint64_t slot) const {
    return mean(i) + cov.marginal_std(i) * rng.normal_at(slot);
  }
};

/// State transition g plus additive zero-mean Gaussian process noise and the
/// initial distribution p0.
struct ProcessModel {
  std::function<VecX(const VecX&, int)> transition;  // g(x, t)
  bool transition_is_identity = false;
  Covariance process_noise;
  GaussianDensity initial_dist;

  static ProcessModel identity(Covariance noise, GaussianDensity p0);
  static ProcessModel affine(MatX A, VecX c, Covariance noise,
                             GaussianDensity p0);
  static ProcessModel custom(std::function<VecX(const VecX&, int)> g,
                             Covariance noise, GaussianDensity p0);
  Index dim() const { return initial_dist.dim(); }
};

enum class SupportDynamicsKind { flip, markov, frozen };

struct SupportDynamics {
  SupportDynamicsKind kind = SupportDynamicsKind::flip;
  double param = 0.0;  // flip probability, or Markov retention alpha

  SupportMask step(const SupportMask& s, RngStream& rng) const;
};

/// Ground truth realization: per t = 1..T the state x(t), the mask that
/// produced x(t), and the measurement y(t).
struct Trajectory {
  std::vector<VecX> states;
  std::vector<SupportMask> supports;
  std::vector<VecX> measurements;

  Index length() const { return static_cast<Index>(states.size()); }
};

Trajectory simulate(const QuadraticMeasurementModel& model,
                    const ProcessModel& process,
                    const SupportDynamics& dynamics, const SupportMask& s0,
                    Index steps, const RngStream& base);

/// a_i, b_i, Q_i drawn standard normal (Q_i symmetrized as (G+G^T)/2).
QuadraticMeasurementModel random_model(Index n, Index N, RngStream& rng,
                                       Covariance R = Covariance());

}  // namespace ncpf

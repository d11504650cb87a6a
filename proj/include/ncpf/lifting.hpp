#pragma once

#include <vector>

#include "ncpf/model.hpp"
#include "ncpf/types.hpp"

namespace ncpf {

/// X = [1; x][1 x^T], the rank-1 lift of a state vector.
template <class Scalar>
MatT<Scalar> lift_vector(const VecT<Scalar>& x) {
  VecT<Scalar> v(x.size() + 1);
  v(0) = Scalar(1);
  v.tail(x.size()) = x;
  return v * v.transpose();
}

/// The N symmetric (n+1)x(n+1) matrices Phi_i with
/// Phi_i = [[a_i, b_i^T/2], [b_i/2, Q_i]], so that h(x)(i) = Tr(Phi_i lift(x)).
struct PhiOperator {
  std::vector<MatX> phi;
  Index state_dim = 0;
  Index measurement_dim = 0;

  Index lifted_dim() const { return state_dim + 1; }
};

PhiOperator lift_model(const QuadraticMeasurementModel& model);

/// H(X)(i) = Tr(Phi_i X).
VecX apply_H(const PhiOperator& op, const Eigen::Ref<const MatX>& X);

/// H^*(u) = sum_i u_i Phi_i.
MatX apply_H_adjoint(const PhiOperator& op, const Eigen::Ref<const VecX>& u);

/// Phi restricted to lifted rows/cols `keep` (which must contain 0).
PhiOperator restrict_phi(const PhiOperator& op, const std::vector<Index>& keep);

struct ExtractedState {
  VecX x;             // X(2..n+1, 1)
  double rank1_ratio; // second/first eigenvalue of X, 0 for exact rank 1
};

ExtractedState extract_state(const Eigen::Ref<const MatX>& X);

}  // namespace ncpf

#include "ncpf/lifting.hpp"

#include <algorithm>

#include "ncpf/numerics.hpp"

namespace ncpf {

PhiOperator lift_model(const QuadraticMeasurementModel& model) {
  const Index n = model.state_dim();
  const Index N = model.measurement_dim();
  PhiOperator op;
  op.state_dim = n;
  op.measurement_dim = N;
  op.phi.reserve(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) {
    MatX p(n + 1, n + 1);
    p(0, 0) = model.a(i);
    p.block(0, 1, 1, n) = model.b.row(i) / 2.0;
    p.block(1, 0, n, 1) = model.b.row(i).transpose() / 2.0;
    p.block(1, 1, n, n) = model.Q[static_cast<std::size_t>(i)];
    op.phi.push_back(std::move(p));
  }
  return op;
}

VecX apply_H(const PhiOperator& op, const Eigen::Ref<const MatX>& X) {
  require(X.rows() == op.lifted_dim() && X.cols() == op.lifted_dim(),
          "apply_H: lifted dimension mismatch");
  VecX out(op.measurement_dim);
  for (Index i = 0; i < op.measurement_dim; ++i)
    out(i) = op.phi[static_cast<std::size_t>(i)].cwiseProduct(X).sum();
  return out;
}

MatX apply_H_adjoint(const PhiOperator& op, const Eigen::Ref<const VecX>& u) {
  require(u.size() == op.measurement_dim, "apply_H_adjoint: length mismatch");
  MatX out = MatX::Zero(op.lifted_dim(), op.lifted_dim());
  for (Index i = 0; i < op.measurement_dim; ++i)
    out += u(i) * op.phi[static_cast<std::size_t>(i)];
  return out;
}

PhiOperator restrict_phi(const PhiOperator& op,
                         const std::vector<Index>& keep) {
  require(!keep.empty() && keep.front() == 0,
          "restrict_phi: keep set must contain the lifted corner");
  Eigen::VectorX<Index> idx(static_cast<Index>(keep.size()));
  for (Index i = 0; i < idx.size(); ++i) idx(i) = keep[static_cast<std::size_t>(i)];
  PhiOperator out;
  out.state_dim = idx.size() - 1;
  out.measurement_dim = op.measurement_dim;
  out.phi.reserve(op.phi.size());
  for (const auto& p : op.phi) out.phi.push_back(p(idx, idx));
  return out;
}

ExtractedState extract_state(const Eigen::Ref<const MatX>& X) {
  require(X.rows() == X.cols() && X.rows() >= 2, "extract_state: bad shape");
  ExtractedState out;
  out.x = X.col(0).tail(X.rows() - 1);
  const EigenDecomposition eig = symmetric_eigendecomposition(X);
  const double top = std::max(eig.eigenvalues(0), 0.0);
  const double second =
      eig.eigenvalues.size() > 1 ? std::max(eig.eigenvalues(1), 0.0) : 0.0;
  out.rank1_ratio = top > 0.0 ? second / top : 1.0;
  return out;
}

}  // namespace ncpf

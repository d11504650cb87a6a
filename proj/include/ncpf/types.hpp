#pragma once

#include <Eigen/Dense>

namespace ncpf {

using Index = Eigen::Index;

template <class Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecX = VecT<double>;
using MatX = MatT<double>;
using VecI = Eigen::VectorXi;

/// Symmetric (n+1)x(n+1) matrix holding a lifted state; the top-left entry
/// plays the role of the constant 1 and the first column carries the state.
using LiftedMatrix = MatX;

template <class Derived>
MatT<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

}  // namespace ncpf

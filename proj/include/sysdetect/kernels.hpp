#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "sysdetect/model_config.hpp"

namespace sysdetect {

/// Distance between two vectors under a Knn metric; p applies to Minkowski.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar distance(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedB>& b, Metric metric,
                                   typename DerivedA::Scalar p = 3) {
  using std::pow;
  using std::sqrt;
  switch (metric) {
    case Metric::Manhattan:
      return (a - b).cwiseAbs().sum();
    case Metric::Euclidean:
      return sqrt((a - b).squaredNorm());
    case Metric::Minkowski:
      return pow((a - b).cwiseAbs().array().pow(p).sum(), typename DerivedA::Scalar(1) / p);
  }
  return 0;
}

/// Kernel matrix K(i, j) = k(A.row(i), B.row(j)).
///   linear: <x, z>;  poly: (gamma <x, z> + 1)^degree;  rbf: exp(-gamma |x - z|^2)
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_matrix(
    const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedB>& B, KernelKind kind,
    typename DerivedA::Scalar gamma, int degree) {
  using Scalar = typename DerivedA::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix inner = A * B.transpose();
  switch (kind) {
    case KernelKind::Linear:
      return inner;
    case KernelKind::Poly:
      return (gamma * inner.array() + Scalar(1)).pow(Scalar(degree)).matrix();
    case KernelKind::Rbf: {
      const auto a2 = A.rowwise().squaredNorm();
      const auto b2 = B.rowwise().squaredNorm();
      Matrix d2 = (-2 * inner).colwise() + a2;
      d2.rowwise() += b2.transpose();
      return (-gamma * d2.array().max(Scalar(0))).exp().matrix();
    }
  }
  return inner;
}

/// Resolves the "auto" (1/d) and "scale" (1/(d var(X))) gamma rules.
template <typename Derived>
typename Derived::Scalar resolve_gamma(const Gamma& gamma, const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const auto d = static_cast<Scalar>(X.cols());
  switch (gamma.kind) {
    case Gamma::Kind::Auto:
      return Scalar(1) / d;
    case Gamma::Kind::Scale: {
      const Scalar mean = X.mean();
      const Scalar var = (X.array() - mean).square().mean();
      return var > Scalar(0) ? Scalar(1) / (d * var) : Scalar(1);
    }
    case Gamma::Kind::Fixed:
      return static_cast<Scalar>(gamma.value);
  }
  return Scalar(1);
}

}  // namespace sysdetect

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "lrmr/error.hpp"
#include "lrmr/linalg.hpp"

namespace lrmr {

/// A stack of m measurement matrices A(1..m), each n1 x n2, defining
///   A(X)   = [<A(i), X>]_i         (trace inner products)
///   A*(y)  = sum_i y_i A(i).
/// Stored explicitly as an m x (n1*n2) design matrix whose row i is the
/// row-major flattening of A(i).
template <typename Scalar>
class BasicEnsemble {
 public:
  BasicEnsemble() = default;

  BasicEnsemble(Index n1, Index n2, Matrix<Scalar> design)
      : n1_(n1), n2_(n2), design_(std::move(design)) {
    if (n1_ < 1 || n2_ < 1) throw DimensionError("ensemble: n1 and n2 must be positive");
    if (design_.rows() < 1) throw DimensionError("ensemble: m must be >= 1");
    if (design_.cols() != n1_ * n2_)
      throw DimensionError("ensemble: design width must equal n1*n2");
    if (!design_.allFinite()) throw NumericalError("ensemble: non-finite entries");
  }

  static BasicEnsemble from_matrices(const std::vector<Matrix<Scalar>>& matrices) {
    if (matrices.empty()) throw DimensionError("ensemble: m must be >= 1");
    const Index n1 = matrices.front().rows(), n2 = matrices.front().cols();
    Matrix<Scalar> design(static_cast<Index>(matrices.size()), n1 * n2);
    for (std::size_t i = 0; i < matrices.size(); ++i) {
      if (matrices[i].rows() != n1 || matrices[i].cols() != n2)
        throw DimensionError("ensemble: measurement matrices differ in shape");
      design.row(static_cast<Index>(i)) = flatten(matrices[i]).transpose();
    }
    return BasicEnsemble(n1, n2, std::move(design));
  }

  /// m = n1*n2 unit-entry matrices enumerated in row-major order; A is the
  /// row-major vectorization and an exact isometry.
  static BasicEnsemble coordinate(Index n1, Index n2) {
    return BasicEnsemble(n1, n2, Matrix<Scalar>::Identity(n1 * n2, n1 * n2));
  }

  Index size() const { return design_.rows(); }
  Index rows() const { return n1_; }
  Index cols() const { return n2_; }
  const Matrix<Scalar>& design() const { return design_; }

  Matrix<Scalar> matrix(Index i) const {
    return unflatten(design_.row(i).transpose(), n1_, n2_);
  }

  BasicEnsemble scaled(Scalar c) const { return BasicEnsemble(n1_, n2_, c * design_); }

  /// Ensemble with measurements reordered: row i of the result is row perm[i].
  BasicEnsemble permuted(const std::vector<Index>& perm) const {
    if (static_cast<Index>(perm.size()) != size())
      throw DimensionError("ensemble: permutation length != m");
    Matrix<Scalar> d(design_.rows(), design_.cols());
    for (Index i = 0; i < size(); ++i) d.row(i) = design_.row(perm[i]);
    return BasicEnsemble(n1_, n2_, std::move(d));
  }

 private:
  Index n1_ = 0;
  Index n2_ = 0;
  Matrix<Scalar> design_;
};

using MeasurementEnsemble = BasicEnsemble<double>;

template <typename Scalar, typename Derived>
Vector<Scalar> apply_map(const BasicEnsemble<Scalar>& ens, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != ens.rows() || x.cols() != ens.cols())
    throw DimensionError("apply_map: matrix shape does not match ensemble");
  return ens.design() * flatten(x);
}

template <typename Scalar, typename Derived>
Matrix<Scalar> adjoint_map(const BasicEnsemble<Scalar>& ens, const Eigen::MatrixBase<Derived>& y) {
  if (y.size() != ens.size()) throw DimensionError("adjoint_map: vector length != m");
  const Vector<Scalar> v = ens.design().transpose() * y;
  return unflatten(v, ens.rows(), ens.cols());
}

/// Power-iteration estimate of the top eigenvalue of X -> A*(A(X)), i.e.
/// ||A||^2. Rayleigh quotients of a PSD power iteration are nondecreasing,
/// so the returned value is a lower estimate that improves with `iters`.
template <typename Scalar>
Scalar op_norm_sq(const BasicEnsemble<Scalar>& ens, int iters, std::uint64_t seed) {
  if (iters < 1) throw DomainError("op_norm_sq: iters must be >= 1");
  const auto& d = ens.design();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector<Scalar> v(d.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) = Scalar(normal(rng));
  v.normalize();
  Scalar quotient = 0;
  for (int it = 0; it < iters; ++it) {
    const Vector<Scalar> w = d.transpose() * (d * v);
    quotient = v.dot(w);
    const Scalar nw = w.norm();
    if (nw == Scalar(0)) return Scalar(0);
    v = w / nw;
  }
  return quotient;
}

}  // namespace lrmr

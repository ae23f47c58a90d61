#pragma once

// Dense primitives shared by the solvers: SVD with a fixed sign convention,
// nuclear-norm machinery (truncation, singular value thresholding) and the
// l1 shrinkage operator. Everything is templated on the Eigen expression type
// so callers can pass blocks, maps or products without materializing them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lrmr/error.hpp"

namespace lrmr {

using Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Thin SVD X = U diag(s) V^T with p = min(rows, cols) triplets, singular
/// values nonincreasing, and the first nonzero coordinate of every left
/// vector nonnegative (the matching right vector is flipped with it).
template <typename Scalar>
struct SvdFactors {
  Matrix<Scalar> left;
  Vector<Scalar> singular_values;
  Matrix<Scalar> right;

  Matrix<Scalar> reconstruct() const {
    return left * singular_values.asDiagonal() * right.transpose();
  }

  /// Sum of the leading `count` triplets.
  Matrix<Scalar> leading(Index count) const {
    count = std::min<Index>(count, singular_values.size());
    return left.leftCols(count) * singular_values.head(count).asDiagonal() *
           right.leftCols(count).transpose();
  }
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().allFinite();
}

template <typename Derived>
SvdFactors<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> a = x;
  if (!a.allFinite()) throw NumericalError("svd: matrix has non-finite entries");

  Eigen::JacobiSVD<Matrix<Scalar>> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "svd: Jacobi sweep did not converge on " << a.rows() << "x" << a.cols()
        << " matrix (frobenius norm " << a.norm() << ", max |entry| "
        << a.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }

  SvdFactors<Scalar> f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  // Sign convention; "nonzero" is relative to the unit column norm.
  const Scalar cutoff = Scalar(64) * Eigen::NumTraits<Scalar>::epsilon();
  for (Index j = 0; j < f.left.cols(); ++j) {
    for (Index i = 0; i < f.left.rows(); ++i) {
      const Scalar u = f.left(i, j);
      if (std::abs(u) > cutoff) {
        if (u < 0) {
          f.left.col(j) *= Scalar(-1);
          f.right.col(j) *= Scalar(-1);
        }
        break;
      }
    }
  }
  return f;
}

template <typename Derived>
Vector<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> a = x;
  if (!a.allFinite()) throw NumericalError("singular_values: non-finite entries");
  return Eigen::JacobiSVD<Matrix<Scalar>>(a).singularValues();
}

template <typename Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& x) {
  return singular_values(x).sum();
}

/// Largest singular value.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0;
  return singular_values(x)(0);
}

/// Best rank-k approximation in Frobenius norm (the top-k singular triplets).
template <typename Derived>
Matrix<typename Derived::Scalar> truncate_rank(const Eigen::MatrixBase<Derived>& x, Index k) {
  if (k < 1) throw DomainError("truncate_rank: k must be >= 1");
  const auto f = svd(x);
  if (k >= f.singular_values.size()) return x;
  return f.leading(k);
}

/// Proximal map of tau*||.||_*: soft-thresholds the singular values.
/// When `nuclear` is non-null it receives the nuclear norm of the result.
template <typename Derived>
Matrix<typename Derived::Scalar> svt(const Eigen::MatrixBase<Derived>& y,
                                     typename Derived::Scalar tau,
                                     typename Derived::Scalar* nuclear = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (tau < 0) throw DomainError("svt: tau must be nonnegative");
  const auto f = svd(y);
  const Vector<Scalar> shrunk = (f.singular_values.array() - tau).cwiseMax(Scalar(0));
  if (nuclear) *nuclear = shrunk.sum();
  if (tau == 0) return y;
  return f.left * shrunk.asDiagonal() * f.right.transpose();
}

/// Componentwise sign(v) * max(|v| - tau, 0).
template <typename Derived>
Vector<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& v,
                                                typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (tau < 0) throw DomainError("soft_threshold: tau must be nonnegative");
  Vector<Scalar> out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const Scalar a = v(i);
    const Scalar mag = std::max(std::abs(a) - tau, Scalar(0));
    out(i) = a < 0 ? -mag : mag;
  }
  return out;
}

/// Row-major flattening, the vectorization used by every measurement map.
template <typename Derived>
Vector<typename Derived::Scalar> flatten(const Eigen::MatrixBase<Derived>& x) {
  return x.template reshaped<Eigen::RowMajor>();
}

/// Inverse of flatten.
template <typename Derived>
Matrix<typename Derived::Scalar> unflatten(const Eigen::MatrixBase<Derived>& v, Index rows,
                                           Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unflatten: length != rows*cols");
  return v.template reshaped<Eigen::RowMajor>(rows, cols);
}

}  // namespace lrmr

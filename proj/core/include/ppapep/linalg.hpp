#pragma once

#include <Eigen/Core>

namespace ppapep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Extended precision, used where exact identities are checked entrywise.
using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending; column k of
/// `vectors` belongs to `values[k]`.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Householder tridiagonalization followed by implicit QL with Wilkinson
/// shifts. Only the lower triangle of `a` is read.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Eigenvalues only (same algorithm, no accumulation of transforms).
Vector symmetric_eigenvalues(const Matrix& a);
ExtVector symmetric_eigenvalues(const ExtMatrix& a);

/// f(A) = V diag(f(lambda)) V^T for symmetric A.
template <class Fn>
Matrix spectral_map(const Matrix& a, Fn&& fn) {
  const SymmetricEigen e = symmetric_eigen(a);
  Vector mapped = e.values;
  for (Eigen::Index k = 0; k < mapped.size(); ++k) mapped[k] = fn(e.values[k]);
  return e.vectors * mapped.asDiagonal() * e.vectors.transpose();
}

/// 0.5 (A + A^T).
inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace ppapep

#pragma once

#include <stdexcept>

#include "ppapep/linalg.hpp"

namespace ppapep {

/// Raised when no active set satisfies the KKT conditions to tolerance.
class QpError : public std::runtime_error {
 public:
  QpError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// min 0.5 z^T H z + h^T z  s.t.  lower <= z <= upper, with H positive
/// definite. Solved exactly by enumerating the 3^n bound patterns, so only
/// meant for n up to about 10.
Vector solve_box_qp(const Matrix& hessian, const Vector& linear, const Vector& lower,
                    const Vector& upper, double tol = 1e-10);

/// min 0.5 z^T H z + h^T z  s.t.  E z <= e, with H positive semidefinite and
/// the problem bounded. Enumerates working sets of size <= dim(z) in order of
/// increasing size and returns the first KKT point.
struct InequalityQp {
  Matrix hessian;
  Vector linear;
  Matrix ineq;
  Vector ineq_rhs;
};

struct QpSolution {
  Vector z;
  Vector multipliers;
};

QpSolution solve_inequality_qp(const InequalityQp& qp, double tol = 1e-10);

}  // namespace ppapep

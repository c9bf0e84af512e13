#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "ppapep/linalg.hpp"
#include "ppapep/metric.hpp"

namespace ppapep {

/// Failure of a numerically solved proximal subproblem.
class ProxError : public std::runtime_error {
 public:
  ProxError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// weight * ||L x||_1; L is the identity when `map` is empty.
struct ScaledL1 {
  double weight = 1.0;
  std::optional<Matrix> map;
};

/// 0.5 x^T Q x + b^T x with Q symmetric positive semidefinite.
struct Quadratic {
  Matrix q;
  Vector b;
};

/// Indicator of { x : lower <= L x <= upper }; L is the identity when
/// `map` is empty, otherwise square and invertible.
struct BoxIndicator {
  Vector lower;
  Vector upper;
  std::optional<Matrix> map;
};

/// max_k (a_k^T x + c_k); row k of `slopes` is a_k.
struct MaxAffine {
  Matrix slopes;
  Vector offsets;
};

/// A closed proper convex function together with its proximal rule
///
///   prox(alpha, x, B) = argmin_y  alpha f(y) + 0.5 ||y - x||_B^2
///
/// and, optionally, a known minimizer. Instances are immutable and can be
/// shared across threads.
class ProxFunction {
 public:
  using Family = std::variant<ScaledL1, Quadratic, BoxIndicator, MaxAffine>;

  /// weight * ||x||_1 on R^dim; the minimizer is the origin.
  static ProxFunction scaled_l1(double weight, Eigen::Index dim);
  static ProxFunction scaled_l1(double weight, Matrix map);
  /// Computes the minimizer when Q is positive definite or b lies in range(Q).
  static ProxFunction quadratic(Matrix q, Vector b);
  /// Every feasible point is a minimizer, so none is attached; use
  /// with_minimizer (typically with the projection of the start point).
  static ProxFunction box_indicator(Vector lower, Vector upper);
  static ProxFunction box_indicator(Vector lower, Vector upper, Matrix map);
  /// The minimizer is not computed; pass it when known.
  static ProxFunction max_affine(Matrix slopes, Vector offsets,
                                 std::optional<Vector> minimizer = std::nullopt);

  const Family& family() const noexcept { return impl_; }
  std::string_view family_name() const noexcept;

  /// f(x); +infinity outside the domain. Box membership is tested with a
  /// 1e-9 relative slack so that iterates returned by the QP solver count
  /// as feasible.
  double value(const Vector& x) const;

  Vector prox(double alpha, const Vector& x, const Metric& metric) const;

  const std::optional<Vector>& minimizer() const noexcept { return minimizer_; }
  /// Returns a copy with the given minimizer attached (the caller vouches
  /// for its optimality).
  ProxFunction with_minimizer(Vector x_star) const;

  /// x -> f(M x) for an invertible M. The minimizer, when known, is mapped
  /// to M^{-1} x*.
  ProxFunction composed_with(const Matrix& m) const;

 private:
  explicit ProxFunction(Family impl) : impl_(std::move(impl)) {}

  Family impl_;
  std::optional<Vector> minimizer_;
};

/// One proximal step; alpha must be positive.
Vector prox_step(const ProxFunction& f, double alpha, const Vector& x, const Metric& metric);

}  // namespace ppapep

#pragma once

#include <Eigen/Cholesky>
#include <optional>
#include <stdexcept>

#include "ppapep/linalg.hpp"

namespace ppapep {

/// Symmetric positive definite matrix B defining <x, y>_B = <Bx, y>.
///
/// Three representations: the identity (dimension-free), a positive multiple
/// of the identity, and a dense SPD matrix. Dense metrics are validated on
/// construction: symmetric to 1e-12 relative, all eigenvalues positive.
class Metric {
 public:
  enum class Kind { Identity, Scalar, Dense };

  Metric() = default;
  static Metric identity() { return Metric(); }
  static Metric scalar(double b);
  static Metric dense(const Matrix& b);

  Kind kind() const noexcept { return kind_; }
  bool is_diagonal() const noexcept { return kind_ != Kind::Dense; }
  /// Diagonal value for Identity/Scalar metrics.
  double scalar_value() const noexcept { return scalar_; }
  /// Fixed dimension of a dense metric; nullopt for identity/scalar.
  std::optional<Eigen::Index> dim() const;

  Vector apply(const Vector& x) const;
  /// B^{-1} u.
  Vector solve(const Vector& u) const;
  /// ||x||_B.
  double norm(const Vector& x) const;
  /// ||u||_{B^{-1}}.
  double dual_norm(const Vector& u) const;

  Matrix matrix(Eigen::Index n) const;
  Matrix sqrt_matrix(Eigen::Index n) const;
  Matrix inv_sqrt_matrix(Eigen::Index n) const;

 private:
  void check_dim(Eigen::Index n) const;

  Kind kind_ = Kind::Identity;
  double scalar_ = 1.0;
  Matrix b_;
  Matrix sqrt_;
  Matrix inv_sqrt_;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace ppapep

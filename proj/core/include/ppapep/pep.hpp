#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "ppapep/linalg.hpp"
#include "ppapep/schedule.hpp"

namespace ppapep {

struct Trajectory;

/// Identity of a constraint of the performance-estimation problem. Iterate
/// indices are 1-based; Cross(i, j) is the interpolation inequality
/// f_j >= f_i + <g_i, x_j - x_i> taken at x_i. Generic tags label rows of
/// hand-built instances that are not part of a PEP.
struct ConstraintId {
  enum class Kind { Radius, FNonneg, AtOpt, Cross, Generic };

  Kind kind = Kind::Radius;
  std::size_t i = 0;
  std::size_t j = 0;

  static ConstraintId radius() { return {Kind::Radius, 0, 0}; }
  static ConstraintId fnonneg(std::size_t i) { return {Kind::FNonneg, i, 0}; }
  static ConstraintId at_opt(std::size_t i) { return {Kind::AtOpt, i, 0}; }
  static ConstraintId cross(std::size_t i, std::size_t j);
  static ConstraintId generic(std::size_t k) { return {Kind::Generic, k, 0}; }

  std::string to_string() const;
  static ConstraintId parse(const std::string& text);

  auto operator<=>(const ConstraintId&) const = default;
};

/// Sum_{i,j} M_ij <x_i, x_j> with M symmetric (every update writes both
/// triangles).
class QuadForm {
 public:
  QuadForm() = default;
  explicit QuadForm(Eigen::Index dim) : m_(Matrix::Zero(dim, dim)) {}
  explicit QuadForm(const Matrix& m);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }

  /// Adds scale * <sum_a u_a x_a, sum_b v_b x_b>.
  void add_inner(const Vector& u, const Vector& v, double scale = 1.0);
  /// <M, G>.
  double evaluate(const Matrix& gram) const;

  QuadForm& operator+=(const QuadForm& other);
  QuadForm& operator*=(double s);

 private:
  Matrix m_;
};

enum class Sense { LessEqual, GreaterEqual, Equal };

/// quad(G) + lin^T F  (sense)  rhs.
struct Constraint {
  QuadForm quad;
  Vector lin;
  double rhs = 0.0;
  Sense sense = Sense::LessEqual;
  ConstraintId tag;

  double lhs(const Matrix& gram, const Vector& fvec) const;
  /// Nonnegative iff satisfied; for equalities -|lhs - rhs|.
  double slack(const Matrix& gram, const Vector& fvec) const;
};

/// max objective(G) + objective_lin^T F over G PSD of order gram_dim and
/// free F in R^fvec_dim, subject to `constraints`.
struct SdpInstance {
  Eigen::Index gram_dim = 0;
  Eigen::Index fvec_dim = 0;
  double radius = 1.0;
  QuadForm objective;
  Vector objective_lin;
  std::vector<Constraint> constraints;

  const Constraint* find(const ConstraintId& tag) const;
  double objective_value(const Matrix& gram, const Vector& fvec) const;
};

/// Gram-matrix PEP of N proximal steps with x* = 0 and f(x*) = 0:
/// 1 + N + N + N(N-1) constraints in the order Radius, FNonneg(1..N),
/// AtOpt(1..N), Cross(i, j) by (i, j).
SdpInstance build_pep(const StepSchedule& sched, double radius);

/// Keeps Radius, FNonneg(N), every AtOpt and Cross(i, j) with |i - j| = 1;
/// 3N constraints remain.
SdpInstance reduce_pep(const SdpInstance& inst);

/// Copy of `inst` without the constraints matching `drop`.
SdpInstance drop_constraints(const SdpInstance& inst,
                             const std::function<bool(const ConstraintId&)>& drop);

struct ConstraintSlack {
  ConstraintId tag;
  double slack;
};

std::vector<ConstraintSlack> evaluate_slacks(const SdpInstance& inst, const Matrix& gram,
                                             const Vector& fvec);

/// Slacks of `inst` at the (G, F) of a trajectory: G from the points shifted
/// by x* in the trajectory's metric, F = f_i - f(x*). Needs a trajectory
/// with known minimizer and exactly gram_dim - 1 steps.
std::vector<ConstraintSlack> evaluate_feasibility(const SdpInstance& inst, const Trajectory& traj);

void to_json(nlohmann::json& j, const ConstraintId& tag);
void to_json(nlohmann::json& j, const SdpInstance& inst);
std::string to_string(Sense sense);

}  // namespace ppapep

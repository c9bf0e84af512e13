#pragma once

#include <nlohmann/json_fwd.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppapep/linalg.hpp"
#include "ppapep/pep.hpp"

namespace ppapep {

struct SolverOptions {
  /// Target for the relative primal infeasibility, dual infeasibility and
  /// duality gap.
  double tol = 1e-8;
  int max_iter = 200;
};

struct SolverResiduals {
  double primal = 0.0;           // ||b - A(X) - D u - s|| / (1 + ||b||), rows scaled to unit norm
  double dual = 0.0;             // ||C - A^T y - Z|| (all blocks) / (1 + ||C||)
  double gap = 0.0;              // |pobj - dobj| / (1 + |pobj| + |dobj|)
  double complementarity = 0.0;  // <X, Z> + s^T z
};

/// Result of a converged solve. `objective` is the primal value in the
/// instance's maximization sense; `dual_objective` the matching upper bound.
/// duals[k] is the Lagrange multiplier of constraints[k] (nonnegative for
/// inequalities, free for equalities).
struct SdpSolution {
  double objective = 0.0;
  double dual_objective = 0.0;
  Matrix gram;
  Vector fvec;
  std::vector<ConstraintId> tags;
  std::vector<double> duals;
  SolverResiduals residuals;
  int iterations = 0;
  Vector gram_eigenvalues;  // ascending

  /// Multiplier of `tag`; 0 for constraints absent from the instance.
  double dual(const ConstraintId& tag) const;
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { MaxIterationsExceeded, NumericalBreakdown };

  SolverError(Kind kind, const std::string& what, SolverResiduals best, int iterations)
      : std::runtime_error(what), kind_(kind), best_(best), iterations_(iterations) {}

  Kind kind() const noexcept { return kind_; }
  /// Residuals of the best iterate seen before giving up.
  const SolverResiduals& best_residuals() const noexcept { return best_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Kind kind_;
  SolverResiduals best_;
  int iterations_;
};

/// Infeasible primal-dual interior-point method (HKM direction, Mehrotra
/// predictor-corrector) for small dense instances, gram_dim <= 64. Iterates
/// are held in long double; results are rounded to double.
/// Deterministic: identical input and options give a bitwise-identical
/// iterate sequence.
SdpSolution solve(const SdpInstance& inst, const SolverOptions& options = {});

/// Number of eigenvalues above rel_tol * lambda_max (0 when lambda_max <= 0).
int rank_profile(const Matrix& gram, double rel_tol);
int rank_profile(const SdpSolution& sol, double rel_tol);

void to_json(nlohmann::json& j, const SdpSolution& sol);
void to_json(nlohmann::json& j, const SolverResiduals& r);

}  // namespace ppapep

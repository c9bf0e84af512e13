#pragma once

#include <cstddef>
#include <nlohmann/json_fwd.hpp>
#include <set>
#include <vector>

#include "ppapep/linalg.hpp"
#include "ppapep/metric.hpp"
#include "ppapep/pep.hpp"
#include "ppapep/prox.hpp"
#include "ppapep/schedule.hpp"
#include "ppapep/sdp.hpp"

namespace ppapep {

struct L1Instance {
  ProxFunction function;
  Vector x0;
  Metric metric;
  double radius;
};

/// f(x) = sqrt(b) R |x| / alpha_{1:N} with x* = 0 and x_0 = -R / sqrt(b),
/// under the scalar metric b. PPA on it attains ||g_N||_{B^-1} = R / alpha_{1:N}.
L1Instance l1_instance(const StepSchedule& sched, double radius, double b_scalar = 1.0);

/// f(x) = R |x| / (2 alpha_{1:N}) with x_0 = -R; attains the function-value
/// bound R^2 / (4 alpha_{1:N}).
L1Instance l1_fvalue_instance(const StepSchedule& sched, double radius);

/// Iterates and function values of PPA on l1_instance (identity metric):
/// points x_0..x_N, fvals f_1..f_N.
struct ClosedForm {
  std::vector<double> points;
  std::vector<double> fvals;
};

ClosedForm closed_form_trajectory(const StepSchedule& sched, double radius);

/// Gram matrix and function values of the closed form, in PEP coordinates.
Matrix closed_form_gram(const StepSchedule& sched, double radius);
Vector closed_form_fvec(const StepSchedule& sched, double radius);

struct AuditEntry {
  ConstraintId tag;
  bool in_reduced;
  bool active;
  double slack;
};

struct ActivenessAudit {
  std::vector<AuditEntry> entries;  // every constraint of the full PEP, in build order
  double max_reduced_slack = 0.0;   // max |slack| over the reduced constraints
  double min_slack = 0.0;
  bool reduced_all_active = false;

  const AuditEntry* find(const ConstraintId& tag) const;
};

/// Evaluates every full-PEP constraint (radius 1) on the closed-form
/// trajectory. A constraint is active when |slack| <= tol.
ActivenessAudit activeness_audit(const StepSchedule& sched, double tol = 1e-10);

struct ProbeResult {
  double value_full;
  double value_dropped;
  bool same;
};

/// Solves the full radius-1 PEP with and without `drop`; solver errors
/// propagate.
ProbeResult inactive_constraint_probe(const StepSchedule& sched, const std::set<ConstraintId>& drop,
                                      double tol, const SolverOptions& options = {});

/// FNonneg(i < N) and every Cross(i, j) with |i - j| >= 2.
std::set<ConstraintId> generically_inactive(std::size_t n);

void to_json(nlohmann::json& j, const ActivenessAudit& audit);
void to_json(nlohmann::json& j, const ProbeResult& probe);

}  // namespace ppapep

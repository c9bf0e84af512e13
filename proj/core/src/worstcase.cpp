#include "ppapep/worstcase.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace ppapep {

L1Instance l1_instance(const StepSchedule& sched, double radius, double b_scalar) {
  if (!(radius > 0.0) || !(b_scalar > 0.0)) {
    throw std::invalid_argument("radius and metric scalar must be positive");
  }
  const double root = std::sqrt(b_scalar);
  return {ProxFunction::scaled_l1(root * radius / sched.total(), 1),
          Vector::Constant(1, -radius / root), Metric::scalar(b_scalar), radius};
}

L1Instance l1_fvalue_instance(const StepSchedule& sched, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  return {ProxFunction::scaled_l1(radius / (2.0 * sched.total()), 1), Vector::Constant(1, -radius),
          Metric::identity(), radius};
}

ClosedForm closed_form_trajectory(const StepSchedule& sched, double radius) {
  const std::size_t n = sched.size();
  const double total = sched.total();
  ClosedForm out;
  out.points.reserve(n + 1);
  out.fvals.reserve(n);
  for (std::size_t i = 0; i <= n; ++i) {
    out.points.push_back(-radius * sched.partial_sum(i + 1, n) / total);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    out.fvals.push_back(radius * radius * sched.partial_sum(i + 1, n) / (total * total));
  }
  return out;
}

Matrix closed_form_gram(const StepSchedule& sched, double radius) {
  const ClosedForm cf = closed_form_trajectory(sched, radius);
  const Eigen::Map<const Vector> p(cf.points.data(), static_cast<Eigen::Index>(cf.points.size()));
  return p * p.transpose();
}

Vector closed_form_fvec(const StepSchedule& sched, double radius) {
  const ClosedForm cf = closed_form_trajectory(sched, radius);
  return Eigen::Map<const Vector>(cf.fvals.data(), static_cast<Eigen::Index>(cf.fvals.size()));
}

const AuditEntry* ActivenessAudit::find(const ConstraintId& tag) const {
  const auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const AuditEntry& e) { return e.tag == tag; });
  return it == entries.end() ? nullptr : &*it;
}

ActivenessAudit activeness_audit(const StepSchedule& sched, double tol) {
  const SdpInstance full = build_pep(sched, 1.0);
  const SdpInstance reduced = reduce_pep(full);
  const Matrix gram = closed_form_gram(sched, 1.0);
  const Vector fvec = closed_form_fvec(sched, 1.0);

  ActivenessAudit audit;
  audit.min_slack = std::numeric_limits<double>::infinity();
  for (const auto& c : full.constraints) {
    const double slack = c.slack(gram, fvec);
    const bool in_reduced = reduced.find(c.tag) != nullptr;
    audit.entries.push_back({c.tag, in_reduced, std::abs(slack) <= tol, slack});
    audit.min_slack = std::min(audit.min_slack, slack);
    if (in_reduced) audit.max_reduced_slack = std::max(audit.max_reduced_slack, std::abs(slack));
  }
  audit.reduced_all_active = audit.max_reduced_slack <= tol;
  return audit;
}

ProbeResult inactive_constraint_probe(const StepSchedule& sched, const std::set<ConstraintId>& drop,
                                      double tol, const SolverOptions& options) {
  const SdpInstance full = build_pep(sched, 1.0);
  const SdpInstance dropped =
      drop_constraints(full, [&](const ConstraintId& tag) { return drop.contains(tag); });
  ProbeResult r{};
  r.value_full = solve(full, options).objective;
  r.value_dropped = solve(dropped, options).objective;
  r.same = std::abs(r.value_full - r.value_dropped) <= tol;
  return r;
}

std::set<ConstraintId> generically_inactive(std::size_t n) {
  std::set<ConstraintId> out;
  for (std::size_t i = 1; i < n; ++i) out.insert(ConstraintId::fnonneg(i));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (i + 2 <= j || j + 2 <= i) out.insert(ConstraintId::cross(i, j));
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const ActivenessAudit& audit) {
  nlohmann::json rows = nlohmann::json::object();
  for (const auto& e : audit.entries) {
    rows[e.tag.to_string()] = {{"reduced", e.in_reduced}, {"active", e.active}, {"slack", e.slack}};
  }
  j = nlohmann::json{{"constraints", std::move(rows)},
                     {"max_reduced_slack", audit.max_reduced_slack},
                     {"min_slack", audit.min_slack},
                     {"reduced_all_active", audit.reduced_all_active}};
}

void to_json(nlohmann::json& j, const ProbeResult& probe) {
  j = nlohmann::json{{"value_full", probe.value_full},
                     {"value_dropped", probe.value_dropped},
                     {"same", probe.same}};
}

}  // namespace ppapep

#include "ppapep/ppa.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

namespace ppapep {
namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Trajectory run_ppa(const ProxFunction& f, const StepSchedule& sched, const Vector& x0,
                   const Metric& metric, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("radius must be a positive finite number");
  }
  if (x0.size() == 0) throw std::invalid_argument("starting point must be non-empty");
  if (f.minimizer()) {
    if (f.minimizer()->size() != x0.size()) {
      throw std::invalid_argument("starting point dimension does not match the minimizer");
    }
    const double dist = metric.norm(x0 - *f.minimizer());
    if (dist > radius * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "||x0 - x*||_B = " << dist << " exceeds the radius " << radius;
      throw std::invalid_argument(os.str());
    }
  }

  Trajectory traj{{x0}, {}, {}, sched, metric, radius, f.minimizer(), std::nullopt};
  if (f.minimizer()) traj.min_value = f.value(*f.minimizer());
  const std::size_t n = sched.size();
  traj.points.reserve(n + 1);
  traj.fvals.reserve(n);
  traj.subgrads.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double alpha = sched.alpha(i);
    Vector next;
    try {
      next = f.prox(alpha, traj.points.back(), metric);
    } catch (const ProxError& e) {
      std::ostringstream os;
      os << "prox step " << i << " failed: " << e.what();
      throw PpaError(os.str(), i, e.residual());
    }
    traj.subgrads.push_back(metric.apply(traj.points.back() - next) / alpha);
    traj.fvals.push_back(f.value(next));
    traj.points.push_back(std::move(next));
  }
  return traj;
}

BoundReport check_bounds(const Trajectory& traj, double tol) {
  if (!traj.minimizer || !traj.min_value) {
    throw std::invalid_argument(
        "bound check needs the minimizer x* and f(x*); supply the minimizer of f");
  }
  const double total = traj.schedule.total();
  BoundReport r{};
  r.tol = tol;
  r.subgrad_norm = traj.metric.dual_norm(traj.subgrads.back());
  r.subgrad_bound = traj.radius / total;
  r.subgrad_margin = r.subgrad_bound - r.subgrad_norm;
  r.subgrad_ok = r.subgrad_margin >= -tol;
  r.fval_gap = traj.fvals.back() - *traj.min_value;
  r.fval_bound = traj.radius * traj.radius / (4.0 * total);
  r.fval_margin = r.fval_bound - r.fval_gap;
  r.fval_ok = r.fval_margin >= -tol;
  return r;
}

Matrix trajectory_gram(const Trajectory& traj) {
  const auto n = static_cast<Eigen::Index>(traj.points.size());
  const Eigen::Index dim = traj.points.front().size();
  const Vector origin = traj.minimizer ? *traj.minimizer : Vector::Zero(dim);
  Matrix p(dim, n);
  for (Eigen::Index k = 0; k < n; ++k) p.col(k) = traj.points[static_cast<std::size_t>(k)] - origin;
  Matrix bp(dim, n);
  for (Eigen::Index k = 0; k < n; ++k) bp.col(k) = traj.metric.apply(p.col(k));
  return symmetrized(p.transpose() * bp);
}

void to_json(nlohmann::json& j, const Trajectory& traj) {
  nlohmann::json xs = nlohmann::json::array();
  for (const auto& x : traj.points) xs.push_back(to_std(x));
  nlohmann::json gs = nlohmann::json::array();
  for (const auto& g : traj.subgrads) gs.push_back(to_std(g));
  j = nlohmann::json{{"x", std::move(xs)},
                     {"f", traj.fvals},
                     {"g", std::move(gs)},
                     {"alphas", traj.schedule.alphas()},
                     {"R", traj.radius}};
}

void to_json(nlohmann::json& j, const BoundReport& r) {
  j = nlohmann::json{{"subgrad_ok", r.subgrad_ok},
                     {"fval_ok", r.fval_ok},
                     {"subgrad_norm", r.subgrad_norm},
                     {"subgrad_bound", r.subgrad_bound},
                     {"subgrad_margin", r.subgrad_margin},
                     {"fval_gap", r.fval_gap},
                     {"fval_bound", r.fval_bound},
                     {"fval_margin", r.fval_margin},
                     {"tol", r.tol}};
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,f,g_norm\r\n";
  for (std::size_t i = 0; i < traj.steps(); ++i) {
    os << (i + 1) << ',' << traj.fvals[i] << ',' << traj.metric.dual_norm(traj.subgrads[i])
       << "\r\n";
  }
  return os.str();
}

}  // namespace ppapep

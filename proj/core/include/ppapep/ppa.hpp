#pragma once

#include <cstddef>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppapep/linalg.hpp"
#include "ppapep/metric.hpp"
#include "ppapep/prox.hpp"
#include "ppapep/schedule.hpp"

namespace ppapep {

/// A prox step failed inside run_ppa; `iteration()` is 1-based.
class PpaError : public std::runtime_error {
 public:
  PpaError(const std::string& what, std::size_t iteration, double residual)
      : std::runtime_error(what), iteration_(iteration), residual_(residual) {}
  std::size_t iteration() const noexcept { return iteration_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iteration_;
  double residual_;
};

/// Output of N proximal steps: points x_0..x_N, values f_1..f_N and
/// residual subgradients g_i = B (x_{i-1} - x_i) / alpha_i.
struct Trajectory {
  std::vector<Vector> points;
  std::vector<double> fvals;
  std::vector<Vector> subgrads;
  StepSchedule schedule;
  Metric metric;
  double radius;
  std::optional<Vector> minimizer;
  std::optional<double> min_value;

  std::size_t steps() const noexcept { return subgrads.size(); }
};

Trajectory run_ppa(const ProxFunction& f, const StepSchedule& sched, const Vector& x0,
                   const Metric& metric, double radius);

struct BoundReport {
  bool subgrad_ok;
  bool fval_ok;
  double subgrad_norm;   // ||g_N||_{B^{-1}}
  double subgrad_bound;  // R / alpha_{1:N}
  double subgrad_margin;
  double fval_gap;    // f(x_N) - f(x*)
  double fval_bound;  // R^2 / (4 alpha_{1:N})
  double fval_margin;
  double tol;
};

/// Checks ||g_N||_{B^{-1}} <= R / alpha_{1:N} and
/// f(x_N) - f(x*) <= R^2 / (4 alpha_{1:N}), each up to `tol`.
BoundReport check_bounds(const Trajectory& traj, double tol = 1e-9);

/// Gram matrix [<B (x_i - x*), x_j - x*>]_{i,j=0..N}; x* defaults to the
/// trajectory's minimizer.
Matrix trajectory_gram(const Trajectory& traj);

void to_json(nlohmann::json& j, const Trajectory& traj);
void to_json(nlohmann::json& j, const BoundReport& report);
/// RFC 4180 CSV with header "iteration,f,g_norm".
std::string trajectory_csv(const Trajectory& traj);

}  // namespace ppapep

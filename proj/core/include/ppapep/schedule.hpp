#pragma once

#include <cstddef>
#include <nlohmann/json_fwd.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppapep {

/// Raised when a step schedule is malformed. `index()` is 1-based, or 0
/// when the problem is not tied to a single entry (e.g. an empty list).
class ScheduleError : public std::invalid_argument {
 public:
  ScheduleError(const std::string& what, std::size_t index)
      : std::invalid_argument(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Positive step lengths alpha_1..alpha_N of the proximal point method.
///
/// All public indices are 1-based. Prefix and suffix sums are accumulated
/// once with compensated summation; the object is immutable afterwards.
class StepSchedule {
 public:
  explicit StepSchedule(std::vector<double> alphas);

  std::size_t size() const noexcept { return alphas_.size(); }
  /// alpha_i, 1 <= i <= N.
  double alpha(std::size_t i) const;
  const std::vector<double>& alphas() const noexcept { return alphas_; }

  /// Sum of alpha_k for k in [i, j]; zero when i > j.
  /// Accepts 1 <= i <= N+1 and 0 <= j <= N so that empty tails such as
  /// alpha_{N+1:N} can be written directly.
  double partial_sum(std::size_t i, std::size_t j) const;

  /// alpha_{1:N}.
  double total() const noexcept { return prefix_.back(); }

 private:
  std::vector<double> alphas_;
  std::vector<double> prefix_;  // prefix_[k] = alpha_{1:k}, k = 0..N
  std::vector<double> suffix_;  // suffix_[k] = alpha_{k:N}, k = 1..N+1
};

/// The unique s in [1, N] with alpha_{1:s} > alpha_{s+1:N} and
/// alpha_{1:s-1} <= alpha_{s:N}.
struct Separator {
  std::size_t s;
};

Separator separator(const StepSchedule& sched);

/// Neumaier-compensated sum.
double compensated_sum(const double* first, const double* last);

void to_json(nlohmann::json& j, const StepSchedule& sched);
/// Parses {"alphas": [...]}; throws ScheduleError naming the offending index.
StepSchedule schedule_from_json(const nlohmann::json& j);

/// Parses "1,2.5,3" into a schedule.
StepSchedule parse_schedule_list(const std::string& text);

}  // namespace ppapep

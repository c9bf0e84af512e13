#include "ppapep/schedule.hpp"

#include <gmpxx.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

namespace ppapep {

double compensated_sum(const double* first, const double* last) {
  double sum = 0.0;
  double comp = 0.0;
  for (; first != last; ++first) {
    const double v = *first;
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

StepSchedule::StepSchedule(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  if (alphas_.empty()) {
    throw ScheduleError("step schedule must contain at least one step length", 0);
  }
  for (std::size_t k = 0; k < alphas_.size(); ++k) {
    const double a = alphas_[k];
    if (!std::isfinite(a) || !(a > 0.0)) {
      std::ostringstream os;
      os << "alphas[" << (k + 1) << "] must be a positive finite number (got " << a << ")";
      throw ScheduleError(os.str(), k + 1);
    }
  }
  const std::size_t n = alphas_.size();
  const double* data = alphas_.data();
  prefix_.assign(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) prefix_[k] = compensated_sum(data, data + k);
  suffix_.assign(n + 2, 0.0);
  for (std::size_t k = n; k >= 1; --k) suffix_[k] = compensated_sum(data + (k - 1), data + n);
}

double StepSchedule::alpha(std::size_t i) const {
  if (i < 1 || i > alphas_.size()) {
    std::ostringstream os;
    os << "step index " << i << " outside [1, " << alphas_.size() << "]";
    throw std::domain_error(os.str());
  }
  return alphas_[i - 1];
}

double StepSchedule::partial_sum(std::size_t i, std::size_t j) const {
  const std::size_t n = alphas_.size();
  if (i < 1 || i > n + 1 || j > n) {
    std::ostringstream os;
    os << "partial sum indices (" << i << ", " << j << ") outside [1, " << n + 1 << "] x [0, " << n
       << "]";
    throw std::domain_error(os.str());
  }
  if (i > j) return 0.0;
  if (i == 1) return prefix_[j];
  if (j == n) return suffix_[i];
  return compensated_sum(alphas_.data() + (i - 1), alphas_.data() + j);
}

Separator separator(const StepSchedule& sched) {
  const std::size_t n = sched.size();
  // alpha_{1:s} - alpha_{s+1:N} is strictly increasing in s and positive at
  // s = N, so the first index where it turns positive is the separator.
  // The sums are formed exactly, so ties between the stored doubles are
  // resolved as written rather than by rounding.
  mpq_class total(0);
  for (const double a : sched.alphas()) total += mpq_class(a);
  mpq_class prefix(0);
  for (std::size_t s = 1; s <= n; ++s) {
    prefix += mpq_class(sched.alpha(s));
    if (2 * prefix > total) return Separator{s};
  }
  return Separator{n};  // unreachable: alpha_{1:N} > 0 = alpha_{N+1:N}
}

void to_json(nlohmann::json& j, const StepSchedule& sched) {
  j = nlohmann::json{{"alphas", sched.alphas()}};
}

StepSchedule schedule_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("alphas") || !j.at("alphas").is_array()) {
    throw ScheduleError("schedule JSON must be an object with an \"alphas\" array", 0);
  }
  const auto& arr = j.at("alphas");
  std::vector<double> alphas;
  alphas.reserve(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number()) {
      std::ostringstream os;
      os << "alphas[" << (k + 1) << "] is not a number";
      throw ScheduleError(os.str(), k + 1);
    }
    alphas.push_back(arr[k].get<double>());
  }
  return StepSchedule(std::move(alphas));
}

StepSchedule parse_schedule_list(const std::string& text) {
  std::vector<double> alphas;
  std::stringstream ss(text);
  std::string item;
  std::size_t k = 0;
  while (std::getline(ss, item, ',')) {
    ++k;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos == 0 || pos != item.size()) {
      std::ostringstream os;
      os << "alphas[" << k << "] is not a number: '" << item << "'";
      throw ScheduleError(os.str(), k);
    }
    alphas.push_back(v);
  }
  return StepSchedule(std::move(alphas));
}

}  // namespace ppapep

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "ppapep/linalg.hpp"
#include "ppapep/metric.hpp"
#include "ppapep/prox.hpp"
#include "ppapep/random.hpp"
#include "ppapep/schedule.hpp"

namespace ppapep {

enum class FunctionKind { L1, Quadratic, Box, MaxAffine };

inline constexpr FunctionKind kAllFunctionKinds[] = {FunctionKind::L1, FunctionKind::Quadratic,
                                                     FunctionKind::Box, FunctionKind::MaxAffine};

std::string_view to_string(FunctionKind kind) noexcept;
/// Accepts the family names used by ProxFunction::family_name().
FunctionKind parse_function_kind(const std::string& name);

enum class MetricKind { Identity, Scalar, Dense };

/// A PPA run with a known minimizer and a radius R >= ||x0 - x*||_B.
struct PpaInstance {
  ProxFunction function;
  StepSchedule schedule;
  Vector x0;
  Metric metric;
  double radius;
};

struct InstanceOptions {
  std::size_t max_steps = 50;
  Eigen::Index max_dim = 4;
};

/// Draws one instance of the given family. The minimizer is attached to the
/// function; for the box it is the B-projection of x0, so it depends on the metric.
PpaInstance random_instance(Xoshiro256& rng, FunctionKind kind, MetricKind metric_kind,
                            const InstanceOptions& options = {});

/// The same run in z = B^{1/2} x coordinates: f(B^{-1/2} z) under the identity
/// metric from B^{1/2} x0.
PpaInstance whitened(const PpaInstance& inst);

}  // namespace ppapep

#include "ppapep/instances.hpp"

#include <algorithm>
#include <stdexcept>

namespace ppapep {
namespace {

Matrix random_matrix(Xoshiro256& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Metric random_metric(Xoshiro256& rng, MetricKind kind, Eigen::Index dim) {
  switch (kind) {
    case MetricKind::Identity:
      return Metric::identity();
    case MetricKind::Scalar:
      return Metric::scalar(rng.uniform(0.2, 5.0));
    case MetricKind::Dense: {
      const Matrix b = random_spd_matrix(rng, dim, 0.3);
      return Metric::dense(b / b.diagonal().mean());
    }
  }
  throw std::logic_error("unknown metric kind");
}

ProxFunction random_l1(Xoshiro256& rng, Eigen::Index dim) {
  const double weight = rng.uniform(0.1, 2.0);
  if (rng.uniform01() < 0.5) return ProxFunction::scaled_l1(weight, dim);
  return ProxFunction::scaled_l1(weight, random_spd_matrix(rng, dim, 0.5));
}

ProxFunction random_quadratic(Xoshiro256& rng, Eigen::Index dim) {
  // Rank-deficient Q with b in its range, so a minimizer exists.
  const auto rank = static_cast<Eigen::Index>(rng.uniform_int(1, static_cast<std::uint64_t>(dim)));
  const Matrix a = random_matrix(rng, dim, rank);
  const Matrix q = symmetrized(a * a.transpose());
  const Vector b = q * random_normal_vector(rng, dim);
  return ProxFunction::quadratic(q, b);
}

ProxFunction random_box(Xoshiro256& rng, Eigen::Index dim) {
  Vector lo(dim), hi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    lo[i] = rng.uniform(-1.0, 0.5);
    hi[i] = lo[i] + rng.uniform(0.0, 1.5);
  }
  if (rng.uniform01() < 0.5) return ProxFunction::box_indicator(lo, hi);
  return ProxFunction::box_indicator(lo, hi, random_spd_matrix(rng, dim, 0.5));
}

ProxFunction random_max_affine(Xoshiro256& rng, Eigen::Index dim) {
  // Pieces active at x* with 0 in the convex hull of their slopes, plus
  // pieces pushed below the maximum at x*.
  const auto active = static_cast<Eigen::Index>(rng.uniform_int(2, 5));
  const auto inactive = static_cast<Eigen::Index>(rng.uniform_int(0, 3));
  const Vector x_star = random_normal_vector(rng, dim);
  const double level = rng.normal();
  Matrix slopes = random_matrix(rng, active + inactive, dim);
  Vector weights(active);
  for (Eigen::Index k = 0; k < active; ++k) weights[k] = rng.uniform(0.1, 1.0);
  Vector mean = Vector::Zero(dim);
  for (Eigen::Index k = 0; k + 1 < active; ++k) mean += weights[k] * slopes.row(k).transpose();
  slopes.row(active - 1) = -(mean / weights[active - 1]).transpose();
  Vector offsets(active + inactive);
  for (Eigen::Index k = 0; k < active + inactive; ++k) {
    const double drop = (k < active) ? 0.0 : rng.uniform(0.1, 1.0);
    offsets[k] = level - drop - slopes.row(k).dot(x_star);
  }
  return ProxFunction::max_affine(slopes, offsets, x_star);
}

}  // namespace

std::string_view to_string(FunctionKind kind) noexcept {
  switch (kind) {
    case FunctionKind::L1:
      return "l1";
    case FunctionKind::Quadratic:
      return "quad";
    case FunctionKind::Box:
      return "box";
    case FunctionKind::MaxAffine:
      return "maxaffine";
  }
  return "unknown";
}

FunctionKind parse_function_kind(const std::string& name) {
  for (const FunctionKind kind : kAllFunctionKinds) {
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown function family '" + name +
                              "' (expected l1, quad, box or maxaffine)");
}

PpaInstance random_instance(Xoshiro256& rng, FunctionKind kind, MetricKind metric_kind,
                            const InstanceOptions& options) {
  if (options.max_steps < 1 || options.max_dim < 1) {
    throw std::invalid_argument("random_instance: max_steps and max_dim must be >= 1");
  }
  const auto steps = static_cast<std::size_t>(rng.uniform_int(1, options.max_steps));
  const auto dim =
      static_cast<Eigen::Index>(rng.uniform_int(1, static_cast<std::uint64_t>(options.max_dim)));
  const StepSchedule sched = random_schedule(rng, steps);
  const Metric metric = random_metric(rng, metric_kind, dim);

  ProxFunction f = [&] {
    switch (kind) {
      case FunctionKind::L1:
        return random_l1(rng, dim);
      case FunctionKind::Quadratic:
        return random_quadratic(rng, dim);
      case FunctionKind::Box:
        return random_box(rng, dim);
      case FunctionKind::MaxAffine:
        return random_max_affine(rng, dim);
    }
    throw std::logic_error("unknown function kind");
  }();

  Vector x0 = 2.0 * random_normal_vector(rng, dim);
  if (kind == FunctionKind::Box) f = f.with_minimizer(f.prox(1.0, x0, metric));
  if (!f.minimizer())
    throw std::logic_error("random_instance: generated function has no minimizer");
  if (kind != FunctionKind::Box) x0 += *f.minimizer();

  // Half the draws use the tight radius.
  const double dist = metric.norm(x0 - *f.minimizer());
  double radius = (rng.uniform01() < 0.5) ? dist : dist * rng.uniform(1.0, 2.0);
  if (!(radius > 0.0)) radius = 1.0;
  return PpaInstance{std::move(f), sched, std::move(x0), metric, radius};
}

PpaInstance whitened(const PpaInstance& inst) {
  const Eigen::Index n = inst.x0.size();
  const Matrix root = inst.metric.sqrt_matrix(n);
  const Matrix inv_root = inst.metric.inv_sqrt_matrix(n);
  ProxFunction f = inst.function.composed_with(inv_root);
  Vector z0 = root * inst.x0;
  // Roundoff in the change of variables must not trip the radius precondition.
  const double radius = std::max(inst.radius, (z0 - *f.minimizer()).norm());
  return PpaInstance{std::move(f), inst.schedule, std::move(z0), Metric::identity(), radius};
}

}  // namespace ppapep

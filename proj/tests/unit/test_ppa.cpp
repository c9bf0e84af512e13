#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "ppapep/instances.hpp"
#include "ppapep/ppa.hpp"
#include "ppapep/random.hpp"

using ppapep::Matrix;
using ppapep::Metric;
using ppapep::ProxFunction;
using ppapep::StepSchedule;
using ppapep::Vector;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

ppapep::Trajectory run(const ppapep::PpaInstance& inst) {
  return ppapep::run_ppa(inst.function, inst.schedule, inst.x0, inst.metric, inst.radius);
}

}  // namespace

TEST(RunPpa, HalfAbsoluteValueExample) {
  const auto f = ProxFunction::scaled_l1(0.5, 1);
  const auto t = ppapep::run_ppa(f, StepSchedule({1, 1}), scalar(-1.0), Metric::identity(), 1.0);
  ASSERT_EQ(t.points.size(), 3u);
  EXPECT_DOUBLE_EQ(t.points[0][0], -1.0);
  EXPECT_DOUBLE_EQ(t.points[1][0], -0.5);
  EXPECT_DOUBLE_EQ(t.points[2][0], 0.0);
  EXPECT_DOUBLE_EQ(t.subgrads[1][0], -0.5);
  EXPECT_DOUBLE_EQ(t.metric.dual_norm(t.subgrads[1]), 0.5);
}

TEST(RunPpa, QuadraticSingleStep) {
  const auto f = ProxFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  const auto t = ppapep::run_ppa(f, StepSchedule({1}), scalar(1.0), Metric::identity(), 1.0);
  EXPECT_DOUBLE_EQ(t.points[1][0], 0.5);
  EXPECT_DOUBLE_EQ(t.subgrads[0][0], 0.5);
}

TEST(RunPpa, RadiusPreconditionAndErrors) {
  const auto f = ProxFunction::scaled_l1(1.0, 1);
  EXPECT_THROW(ppapep::run_ppa(f, StepSchedule({1}), scalar(2.0), Metric::identity(), 1.0),
               std::invalid_argument);
  EXPECT_THROW(ppapep::run_ppa(f, StepSchedule({1}), scalar(0.5), Metric::identity(), 0.0),
               std::invalid_argument);
  EXPECT_THROW(ppapep::run_ppa(f, StepSchedule({1}), Vector::Zero(2), Metric::identity(), 1.0),
               std::invalid_argument);
}

TEST(CheckBounds, GeometricDecay) {
  const auto f = ProxFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  const auto t = ppapep::run_ppa(f, StepSchedule({1, 1, 1}), scalar(1.0), Metric::identity(), 1.0);
  for (std::size_t i = 0; i <= 3; ++i) EXPECT_DOUBLE_EQ(t.points[i][0], std::ldexp(1.0, -int(i)));
  const auto r = ppapep::check_bounds(t);
  EXPECT_DOUBLE_EQ(r.subgrad_norm, 0.125);
  EXPECT_DOUBLE_EQ(r.subgrad_bound, 1.0 / 3.0);
  EXPECT_GT(r.subgrad_margin, 0.0);
  EXPECT_TRUE(r.subgrad_ok);
  EXPECT_TRUE(r.fval_ok);
}

TEST(CheckBounds, WorstCaseL1AttainsSubgradientBound) {
  const auto f = ProxFunction::scaled_l1(1.0 / 3.0, 1);
  const auto t = ppapep::run_ppa(f, StepSchedule({1, 2}), scalar(-1.0), Metric::identity(), 1.0);
  const auto r = ppapep::check_bounds(t);
  EXPECT_NEAR(r.subgrad_margin, 0.0, 1e-15);
  EXPECT_TRUE(r.subgrad_ok);
}

TEST(CheckBounds, ZeroFunctionIsStationary) {
  const auto f = ProxFunction::scaled_l1(0.0, 2);
  const Vector x0 = Vector::Constant(2, 0.5);
  const auto t = ppapep::run_ppa(f, StepSchedule({0.3, 0.7}), x0, Metric::identity(), 1.0);
  const auto r = ppapep::check_bounds(t);
  EXPECT_EQ(r.subgrad_norm, 0.0);
  EXPECT_DOUBLE_EQ(r.subgrad_margin, r.subgrad_bound);
  EXPECT_DOUBLE_EQ(r.fval_margin, r.fval_bound);
}

TEST(CheckBounds, MissingMinimizerIsAnError) {
  const auto f = ProxFunction::box_indicator(Vector::Zero(1), Vector::Ones(1));
  const auto t = ppapep::run_ppa(f, StepSchedule({1}), scalar(2.0), Metric::identity(), 1.0);
  EXPECT_THROW(ppapep::check_bounds(t), std::invalid_argument);
}

TEST(Trajectory, SubgradientsMatchDefinition) {
  ppapep::Xoshiro256 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = ppapep::random_instance(rng, ppapep::FunctionKind::MaxAffine,
                                              ppapep::MetricKind::Dense, {10, 3});
    const auto t = run(inst);
    for (std::size_t i = 1; i <= t.steps(); ++i) {
      const Vector expect =
          inst.metric.apply(t.points[i - 1] - t.points[i]) / inst.schedule.alpha(i);
      EXPECT_LE((t.subgrads[i - 1] - expect).cwiseAbs().maxCoeff(), 1e-15 * (1.0 + expect.norm()));
    }
  }
}

// Interpolation consistency: f(y) >= f_i + <g_i, y - x_i> at y = x* and every
// iterate, plus monotone function values.
TEST(Trajectory, InterpolationDataIsConsistent) {
  ppapep::Xoshiro256 rng(13);
  for (const auto kind : ppapep::kAllFunctionKinds) {
    for (const auto mk : {ppapep::MetricKind::Identity, ppapep::MetricKind::Dense}) {
      for (int trial = 0; trial < 25; ++trial) {
        const auto inst = ppapep::random_instance(rng, kind, mk, {20, 3});
        const auto t = run(inst);
        std::vector<std::pair<Vector, double>> probes{{*t.minimizer, *t.min_value}};
        for (std::size_t j = 1; j <= t.steps(); ++j)
          probes.emplace_back(t.points[j], t.fvals[j - 1]);
        for (std::size_t i = 1; i <= t.steps(); ++i) {
          for (const auto& [y, fy] : probes) {
            const double lin = t.fvals[i - 1] + t.subgrads[i - 1].dot(y - t.points[i]);
            EXPECT_GE(fy, lin - 1e-9) << to_string(kind) << " step " << i;
          }
          if (i > 1) EXPECT_LE(t.fvals[i - 1], t.fvals[i - 2] + 1e-12) << to_string(kind);
        }
      }
    }
  }
}

TEST(Trajectory, MetricCorrespondence) {
  ppapep::Xoshiro256 rng(17);
  for (const auto kind : ppapep::kAllFunctionKinds) {
    for (int trial = 0; trial < 25; ++trial) {
      const auto inst = ppapep::random_instance(rng, kind, ppapep::MetricKind::Dense, {15, 3});
      const auto w = ppapep::whitened(inst);
      const auto tx = run(inst);
      const auto tz = run(w);
      const Matrix inv_root = inst.metric.inv_sqrt_matrix(inst.x0.size());
      for (std::size_t i = 0; i <= tx.steps(); ++i) {
        const Vector back = inv_root * tz.points[i];
        EXPECT_LE((back - tx.points[i]).cwiseAbs().maxCoeff(), 1e-9) << to_string(kind);
      }
      EXPECT_NEAR(tx.metric.dual_norm(tx.subgrads.back()), tz.subgrads.back().norm(), 1e-9);
    }
  }
}

TEST(Trajectory, GramMatchesMetricInnerProducts) {
  const auto f = ProxFunction::scaled_l1(0.5, 1);
  const auto t = ppapep::run_ppa(f, StepSchedule({1, 1}), scalar(-1.0), Metric::scalar(4.0), 2.0);
  const Matrix g = ppapep::trajectory_gram(t);
  ASSERT_EQ(g.rows(), 3);
  EXPECT_DOUBLE_EQ(g(0, 0), 4.0 * t.points[0][0] * t.points[0][0]);
  EXPECT_DOUBLE_EQ(g(0, 1), 4.0 * t.points[0][0] * t.points[1][0]);
}

TEST(Trajectory, JsonAndCsvShapes) {
  const auto f = ProxFunction::scaled_l1(0.5, 1);
  const auto t = ppapep::run_ppa(f, StepSchedule({1, 1}), scalar(-1.0), Metric::identity(), 1.0);
  const nlohmann::json j = t;
  EXPECT_EQ(j.at("x").size(), 3u);
  EXPECT_EQ(j.at("f").size(), 2u);
  EXPECT_EQ(j.at("g").size(), 2u);
  EXPECT_EQ(j.at("alphas"), nlohmann::json({1.0, 1.0}));
  EXPECT_EQ(j.at("R"), 1.0);
  const std::string csv = ppapep::trajectory_csv(t);
  EXPECT_EQ(csv.rfind("iteration,f,g_norm\r\n", 0), 0u);
  EXPECT_NE(csv.find("2,0,0.5\r\n"), std::string::npos);
}

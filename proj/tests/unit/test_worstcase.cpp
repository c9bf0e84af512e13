#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "ppapep/ppa.hpp"
#include "ppapep/random.hpp"
#include "ppapep/sdp.hpp"
#include "ppapep/worstcase.hpp"

using ppapep::ConstraintId;
using ppapep::Matrix;
using ppapep::StepSchedule;
using ppapep::Vector;

namespace {

ppapep::Trajectory run(const ppapep::L1Instance& w, const StepSchedule& s) {
  return ppapep::run_ppa(w.function, s, w.x0, w.metric, w.radius);
}

}  // namespace

TEST(L1Instance, TwoUnitSteps) {
  const StepSchedule s({1, 1});
  const auto w = ppapep::l1_instance(s, 1.0);
  EXPECT_DOUBLE_EQ(w.function.value(Vector::Constant(1, -2.0)), 1.0);
  EXPECT_DOUBLE_EQ(w.x0[0], -1.0);
  const auto t = run(w, s);
  EXPECT_DOUBLE_EQ(t.metric.dual_norm(t.subgrads.back()), 0.5);
}

TEST(L1Instance, ScalarMetricKeepsTheBoundTight) {
  const StepSchedule s({0.4, 1.3, 0.2});
  for (double b : {0.25, 1.0, 9.0}) {
    const auto w = ppapep::l1_instance(s, 2.0, b);
    EXPECT_NEAR(w.metric.norm(w.x0), 2.0, 1e-15);
    const auto t = run(w, s);
    EXPECT_NEAR(t.metric.dual_norm(t.subgrads.back()), 2.0 / s.total(), 1e-14);
  }
}

TEST(ClosedForm, ThreeSteps) {
  const auto cf = ppapep::closed_form_trajectory(StepSchedule({1, 2, 3}), 1.0);
  const std::vector<double> p{-1.0, -5.0 / 6.0, -0.5, 0.0};
  const std::vector<double> f{5.0 / 36.0, 3.0 / 36.0, 0.0};
  ASSERT_EQ(cf.points.size(), 4u);
  ASSERT_EQ(cf.fvals.size(), 3u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(cf.points[i], p[i], 1e-15);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(cf.fvals[i], f[i], 1e-15);
}

TEST(ClosedForm, EqualsPpaRun) {
  ppapep::Xoshiro256 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 29));
    const double r = rng.uniform(0.1, 5.0);
    const auto cf = ppapep::closed_form_trajectory(s, r);
    const auto t = run(ppapep::l1_instance(s, r), s);
    for (std::size_t i = 0; i <= s.size(); ++i) ASSERT_NEAR(cf.points[i], t.points[i][0], 1e-12);
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_NEAR(cf.fvals[i], t.fvals[i], 1e-12);
    EXPECT_NEAR(std::abs(t.subgrads.back()[0]), r / s.total(), 1e-12);
  }
}

TEST(ClosedForm, GramIsRankOne) {
  ppapep::Xoshiro256 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 19));
    const Matrix g = ppapep::closed_form_gram(s, 1.0);
    EXPECT_EQ(ppapep::rank_profile(g, 1e-9), 1);
    const Vector f = ppapep::closed_form_fvec(s, 1.0);
    EXPECT_EQ(f.size(), static_cast<Eigen::Index>(s.size()));
    EXPECT_NEAR(f[f.size() - 1], 0.0, 1e-15);
  }
}

TEST(FunctionValueInstance, AttainsTheBound) {
  ppapep::Xoshiro256 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 29));
    const double r = rng.uniform(0.1, 3.0);
    const auto w = ppapep::l1_fvalue_instance(s, r);
    const auto report = ppapep::check_bounds(run(w, s));
    EXPECT_NEAR(report.fval_gap, r * r / (4.0 * s.total()), 1e-10);
    EXPECT_TRUE(report.fval_ok);
  }
}

TEST(Audit, ReducedSetIsActive) {
  ppapep::Xoshiro256 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 14));
    const auto audit = ppapep::activeness_audit(s);
    EXPECT_TRUE(audit.reduced_all_active);
    EXPECT_LE(audit.max_reduced_slack, 1e-10);
    EXPECT_GE(audit.min_slack, -1e-12);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const auto* e = audit.find(ConstraintId::fnonneg(i));
      ASSERT_NE(e, nullptr);
      EXPECT_GT(e->slack, 1e-12);
      EXPECT_FALSE(e->in_reduced);
    }
  }
}

TEST(Audit, ThreeUnitSteps) {
  const auto audit = ppapep::activeness_audit(StepSchedule({1, 1, 1}));
  EXPECT_EQ(audit.entries.size(), 13u);
  EXPECT_NEAR(audit.find(ConstraintId::radius())->slack, 0.0, 1e-15);
  EXPECT_GT(audit.find(ConstraintId::fnonneg(1))->slack, 0.0);
  // The closed form makes the non-adjacent cross constraints tight as well.
  EXPECT_NEAR(audit.find(ConstraintId::cross(1, 3))->slack, 0.0, 1e-15);
  const nlohmann::json j = audit;
  EXPECT_TRUE(j.at("constraints").contains("Cross(1,3)"));
}

TEST(Probe, DroppingGenericallyInactiveConstraints) {
  const StepSchedule s({0.8, 0.3, 0.6, 0.9, 0.2});
  const auto same = ppapep::inactive_constraint_probe(s, ppapep::generically_inactive(5), 1e-7);
  EXPECT_TRUE(same.same);
  EXPECT_NEAR(same.value_full, 1.0 / (s.total() * s.total()), 1e-7);
  const auto none = ppapep::inactive_constraint_probe(s, {}, 1e-12);
  EXPECT_TRUE(none.same);
  const auto degraded = ppapep::inactive_constraint_probe(s, {ConstraintId::fnonneg(5)}, 1e-7);
  EXPECT_FALSE(degraded.same);
  EXPECT_GT(degraded.value_dropped, degraded.value_full + 1e-3);
}

TEST(Probe, GenericallyInactiveSet) {
  const auto drop = ppapep::generically_inactive(3);
  EXPECT_EQ(drop.size(), 2u + 2u);
  EXPECT_TRUE(drop.count(ConstraintId::fnonneg(1)));
  EXPECT_TRUE(drop.count(ConstraintId::cross(3, 1)));
  EXPECT_FALSE(drop.count(ConstraintId::fnonneg(3)));
  EXPECT_TRUE(ppapep::generically_inactive(1).empty());
}

#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "ppapep/instances.hpp"
#include "ppapep/pep.hpp"
#include "ppapep/ppa.hpp"
#include "ppapep/random.hpp"
#include "ppapep/worstcase.hpp"

using ppapep::ConstraintId;
using ppapep::Matrix;
using ppapep::SdpInstance;
using ppapep::StepSchedule;
using ppapep::Vector;

namespace {

// Interpolation quantities computed directly from explicit points, with
// x* = 0 and f* = 0. Positive means satisfied.
double direct_slack(const ConstraintId& tag, const StepSchedule& s, const Matrix& p,
                    const Vector& f, double radius) {
  auto x = [&](std::size_t k) -> Vector { return p.col(static_cast<Eigen::Index>(k)); };
  auto g = [&](std::size_t k) -> Vector { return (x(k - 1) - x(k)) / s.alpha(k); };
  auto fv = [&](std::size_t k) { return f[static_cast<Eigen::Index>(k - 1)]; };
  switch (tag.kind) {
    case ConstraintId::Kind::Radius:
      return radius * radius - x(0).squaredNorm();
    case ConstraintId::Kind::FNonneg:
      return fv(tag.i);
    case ConstraintId::Kind::AtOpt:
      return -(fv(tag.i) + g(tag.i).dot(-x(tag.i)));
    case ConstraintId::Kind::Cross:
      return fv(tag.j) - fv(tag.i) - g(tag.i).dot(x(tag.j) - x(tag.i));
    default:
      return 0.0;
  }
}

std::size_t full_count(std::size_t n) { return 1 + n + n + n * (n - 1); }

}  // namespace

TEST(BuildPep, ConstraintCounts) {
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    const auto inst = ppapep::build_pep(StepSchedule(std::vector<double>(n, 1.0)), 1.0);
    EXPECT_EQ(inst.constraints.size(), full_count(n));
    EXPECT_EQ(ppapep::reduce_pep(inst).constraints.size(), 3 * n);
    EXPECT_EQ(inst.gram_dim, static_cast<Eigen::Index>(n + 1));
    EXPECT_EQ(inst.fvec_dim, static_cast<Eigen::Index>(n));
  }
  EXPECT_EQ(full_count(2), 7u);
  EXPECT_EQ(full_count(5), 31u);
}

TEST(BuildPep, SingleStepConstraints) {
  const auto inst = ppapep::build_pep(StepSchedule({1}), 1.0);
  ASSERT_EQ(inst.constraints.size(), 3u);
  const auto* at = inst.find(ConstraintId::at_opt(1));
  ASSERT_NE(at, nullptr);
  // 0 >= f_1 - G01 + G11
  EXPECT_DOUBLE_EQ(at->quad.matrix()(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(at->quad.matrix()(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(at->quad.matrix()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(at->lin[0], 1.0);
  EXPECT_EQ(at->sense, ppapep::Sense::LessEqual);
  const auto* r = inst.find(ConstraintId::radius());
  ASSERT_NE(r, nullptr);
  EXPECT_DOUBLE_EQ(r->quad.matrix()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r->rhs, 1.0);
}

TEST(BuildPep, ObjectiveForTwoUnitSteps) {
  const auto inst = ppapep::build_pep(StepSchedule({1, 1}), 1.0);
  Matrix expect = Matrix::Zero(3, 3);
  expect(1, 1) = 1;
  expect(2, 2) = 1;
  expect(1, 2) = expect(2, 1) = -1;
  EXPECT_EQ(inst.objective.matrix(), expect);
  EXPECT_EQ(inst.objective_lin, Vector::Zero(2));
}

TEST(BuildPep, MatchesDirectInterpolationFormulas) {
  ppapep::Xoshiro256 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 7));
    const double radius = rng.uniform(0.1, 3.0);
    const auto inst = ppapep::build_pep(s, radius);
    const Eigen::Index n = static_cast<Eigen::Index>(s.size());
    Matrix p(3, n + 1);
    for (Eigen::Index j = 0; j <= n; ++j) p.col(j) = random_normal_vector(rng, 3);
    const Vector f = random_normal_vector(rng, n);
    const Matrix gram = p.transpose() * p;
    std::set<ConstraintId> seen;
    for (const auto& c : inst.constraints) {
      EXPECT_TRUE(seen.insert(c.tag).second) << "duplicate " << c.tag.to_string();
      EXPECT_EQ(c.quad.matrix(), c.quad.matrix().transpose());
      const double expect = direct_slack(c.tag, s, p, f, radius);
      EXPECT_NEAR(c.slack(gram, f), expect, 1e-10 * (1.0 + std::abs(expect))) << c.tag.to_string();
    }
    const Vector gn = (p.col(n - 1) - p.col(n)) / s.alpha(s.size());
    EXPECT_NEAR(inst.objective_value(gram, f), gn.squaredNorm(), 1e-10 * (1.0 + gn.squaredNorm()));
  }
}

TEST(BuildPep, ConstraintOrderIsStable) {
  const auto inst = ppapep::build_pep(StepSchedule({1, 1, 1}), 1.0);
  std::vector<std::string> tags;
  for (const auto& c : inst.constraints) tags.push_back(c.tag.to_string());
  const std::vector<std::string> expect{
      "Radius",     "FNonneg(1)", "FNonneg(2)", "FNonneg(3)", "AtOpt(1)",   "AtOpt(2)",  "AtOpt(3)",
      "Cross(1,2)", "Cross(1,3)", "Cross(2,1)", "Cross(2,3)", "Cross(3,1)", "Cross(3,2)"};
  EXPECT_EQ(tags, expect);
}

TEST(ReducePep, KeepsExactlyTheAdjacentStructure) {
  const auto red = ppapep::reduce_pep(ppapep::build_pep(StepSchedule({1, 2, 3, 4, 5}), 1.0));
  for (const auto& c : red.constraints) {
    switch (c.tag.kind) {
      case ConstraintId::Kind::FNonneg:
        EXPECT_EQ(c.tag.i, 5u);
        break;
      case ConstraintId::Kind::Cross:
        EXPECT_EQ(c.tag.i > c.tag.j ? c.tag.i - c.tag.j : c.tag.j - c.tag.i, 1u);
        break;
      default:
        break;
    }
  }
  EXPECT_EQ(ppapep::reduce_pep(ppapep::build_pep(StepSchedule({1}), 1.0)).constraints.size(), 3u);
}

TEST(ConstraintIdText, RoundTrip) {
  for (const auto& tag : {ConstraintId::radius(), ConstraintId::fnonneg(3),
                          ConstraintId::at_opt(12), ConstraintId::cross(4, 2)}) {
    EXPECT_EQ(ConstraintId::parse(tag.to_string()), tag);
  }
  EXPECT_THROW(ConstraintId::parse("Cross(1,1)"), std::invalid_argument);
  EXPECT_THROW(ConstraintId::parse("FNonneg(0)"), std::invalid_argument);
  EXPECT_THROW(ConstraintId::parse("Bogus(1)"), std::invalid_argument);
  EXPECT_THROW(ConstraintId::parse("AtOpt(1,2)"), std::invalid_argument);
}

TEST(EvaluateFeasibility, WorstCaseL1IsActiveOnReducedSet) {
  const StepSchedule s({1, 1});
  const auto w = ppapep::l1_instance(s, 1.0);
  const auto t = ppapep::run_ppa(w.function, s, w.x0, w.metric, w.radius);
  const auto red = ppapep::reduce_pep(ppapep::build_pep(s, 1.0));
  for (const auto& sl : ppapep::evaluate_feasibility(red, t)) {
    EXPECT_NEAR(sl.slack, 0.0, 1e-12) << sl.tag.to_string();
  }
}

TEST(EvaluateFeasibility, QuadraticHasStrictlyPositiveValues) {
  const auto f = ppapep::ProxFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  const StepSchedule s({1, 1, 1});
  const auto t = ppapep::run_ppa(f, s, Vector::Ones(1), ppapep::Metric::identity(), 1.0);
  const auto slacks = ppapep::evaluate_feasibility(ppapep::build_pep(s, 1.0), t);
  for (const auto& sl : slacks) {
    if (sl.tag == ConstraintId::fnonneg(1) || sl.tag == ConstraintId::fnonneg(2)) {
      EXPECT_GT(sl.slack, 1e-3);
    }
    EXPECT_GE(sl.slack, -1e-12);
  }
}

TEST(EvaluateFeasibility, DimensionMismatch) {
  const auto f = ppapep::ProxFunction::scaled_l1(0.0, 1);
  const auto t =
      ppapep::run_ppa(f, StepSchedule({1, 1}), Vector::Ones(1), ppapep::Metric::identity(), 1.0);
  EXPECT_THROW(ppapep::evaluate_feasibility(ppapep::build_pep(StepSchedule({1}), 1.0), t),
               std::invalid_argument);
  const auto inst = ppapep::build_pep(StepSchedule({1}), 1.0);
  EXPECT_THROW(ppapep::evaluate_slacks(inst, Matrix::Zero(3, 3), Vector::Zero(1)),
               std::invalid_argument);
}

TEST(EvaluateFeasibility, PpaDataIsAlwaysFeasible) {
  ppapep::Xoshiro256 rng(31);
  for (const auto kind : ppapep::kAllFunctionKinds) {
    for (const auto mk :
         {ppapep::MetricKind::Identity, ppapep::MetricKind::Scalar, ppapep::MetricKind::Dense}) {
      for (int trial = 0; trial < 15; ++trial) {
        const auto inst = ppapep::random_instance(rng, kind, mk, {12, 3});
        const auto t =
            ppapep::run_ppa(inst.function, inst.schedule, inst.x0, inst.metric, inst.radius);
        const auto pep = ppapep::build_pep(inst.schedule, inst.radius);
        for (const auto& sl : ppapep::evaluate_feasibility(pep, t)) {
          EXPECT_GE(sl.slack, -1e-9) << to_string(kind) << " " << sl.tag.to_string();
        }
      }
    }
  }
}

TEST(BuildPep, RadiusScaling) {
  ppapep::Xoshiro256 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 6));
    const double r = rng.uniform(0.2, 4.0);
    const auto w = ppapep::l1_instance(s, 1.0);
    const auto t = ppapep::run_ppa(w.function, s, w.x0, w.metric, w.radius);
    const Matrix gram = ppapep::trajectory_gram(t);
    const Vector fvec =
        Eigen::Map<const Vector>(t.fvals.data(), static_cast<Eigen::Index>(t.steps()));
    const auto unit = ppapep::build_pep(s, 1.0);
    const auto scaled = ppapep::build_pep(s, r);
    for (const auto& sl : ppapep::evaluate_slacks(scaled, r * r * gram, r * r * fvec)) {
      EXPECT_GE(sl.slack, -1e-9 * r * r) << sl.tag.to_string();
    }
    EXPECT_NEAR(scaled.objective_value(r * r * gram, r * r * fvec),
                r * r * unit.objective_value(gram, fvec), 1e-12 * r * r);
  }
}

TEST(BuildPep, JsonListsEveryConstraint) {
  const auto inst = ppapep::build_pep(StepSchedule({1, 1}), 2.0);
  const nlohmann::json j = inst;
  ASSERT_EQ(j.at("constraints").size(), 7u);
  EXPECT_EQ(j.at("constraints")[0].at("tag"), "Radius");
  EXPECT_EQ(j.at("constraints")[0].at("rhs"), 4.0);
  EXPECT_EQ(j.at("constraints")[0].at("M").size(), 3u);
  EXPECT_EQ(j.at("radius"), 2.0);
}

TEST(BuildPep, RejectsBadRadius) {
  EXPECT_THROW(ppapep::build_pep(StepSchedule({1}), 0.0), std::invalid_argument);
  EXPECT_THROW(ppapep::build_pep(StepSchedule({1}), -1.0), std::invalid_argument);
}

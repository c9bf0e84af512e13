#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "ppapep/certificate.hpp"
#include "ppapep/pep.hpp"
#include "ppapep/random.hpp"
#include "ppapep/sdp.hpp"

using ppapep::ConstraintId;
using ppapep::Matrix;
using ppapep::SdpInstance;
using ppapep::StepSchedule;
using ppapep::Vector;

namespace {

// max X11 s.t. X11 + X22 = 1, X PSD.
SdpInstance tiny_sdp() {
  SdpInstance inst;
  inst.gram_dim = 2;
  inst.fvec_dim = 0;
  Matrix obj = Matrix::Zero(2, 2);
  obj(0, 0) = 1.0;
  inst.objective = ppapep::QuadForm(obj);
  inst.objective_lin = Vector::Zero(0);
  ppapep::Constraint c;
  c.quad = ppapep::QuadForm(Matrix::Identity(2, 2));
  c.lin = Vector::Zero(0);
  c.rhs = 1.0;
  c.sense = ppapep::Sense::Equal;
  c.tag = ConstraintId::generic(1);
  inst.constraints.push_back(c);
  return inst;
}

}  // namespace

TEST(Solve, TinySdp) {
  const auto sol = ppapep::solve(tiny_sdp());
  EXPECT_NEAR(sol.objective, 1.0, 1e-7);
  EXPECT_NEAR(sol.gram(0, 0), 1.0, 1e-7);
  EXPECT_EQ(ppapep::rank_profile(sol, 1e-5), 1);
}

TEST(Solve, SingleStepPep) {
  const auto sol = ppapep::solve(ppapep::build_pep(StepSchedule({1}), 1.0));
  EXPECT_NEAR(sol.objective, 1.0, 1e-7);
}

TEST(Solve, TwoUnitStepsMatchConjecture) {
  const auto sol = ppapep::solve(ppapep::build_pep(StepSchedule({1, 1}), 1.0));
  EXPECT_NEAR(sol.objective, 0.25, 1e-7);
  EXPECT_NEAR(sol.dual(ConstraintId::radius()), 0.25, 1e-6);
}

TEST(Solve, TwentyRandomStepsIsRankOne) {
  ppapep::Xoshiro256 rng(7);
  const auto s = ppapep::random_schedule(rng, 20);
  const auto sol = ppapep::solve(ppapep::build_pep(s, 1.0));
  EXPECT_NEAR(std::sqrt(sol.objective), 1.0 / s.total(), 1e-6);
  EXPECT_EQ(ppapep::rank_profile(sol, 1e-5), 1);
}

TEST(Solve, SolutionInvariants) {
  ppapep::Xoshiro256 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 7));
    const auto sol = ppapep::solve(ppapep::build_pep(s, 1.0));
    const double tol = 1e-8;
    EXPECT_EQ(sol.gram, sol.gram.transpose());
    EXPECT_GE(sol.gram_eigenvalues[0], -tol);
    for (double d : sol.duals) EXPECT_GE(d, -tol);
    EXPECT_LE(sol.residuals.primal, tol);
    EXPECT_LE(sol.residuals.dual, tol);
    EXPECT_LE(sol.residuals.gap, tol);
    ASSERT_EQ(sol.tags.size(), sol.duals.size());
  }
}

TEST(Solve, CertificateUpperBoundsPrimal) {
  ppapep::Xoshiro256 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = ppapep::random_schedule(rng, 1 + rng.uniform_int(0, 9));
    const auto sol = ppapep::solve(ppapep::build_pep(s, 1.0));
    const auto report = ppapep::certify(s);
    EXPECT_GE(report.bound, sol.objective - 1e-7);
  }
}

TEST(Solve, Deterministic) {
  const auto inst = ppapep::build_pep(StepSchedule({0.3, 0.9, 0.2, 0.5}), 1.0);
  const auto a = ppapep::solve(inst);
  const auto b = ppapep::solve(inst);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.gram, b.gram);
  EXPECT_EQ(a.duals, b.duals);
}

TEST(Solve, IterationCapReportsBestResiduals) {
  const auto inst = ppapep::build_pep(StepSchedule({0.3, 0.9, 0.2, 0.5}), 1.0);
  try {
    ppapep::solve(inst, {1e-8, 3});
    FAIL() << "expected MaxIterationsExceeded";
  } catch (const ppapep::SolverError& e) {
    EXPECT_EQ(e.kind(), ppapep::SolverError::Kind::MaxIterationsExceeded);
    EXPECT_EQ(e.iterations(), 3);
    EXPECT_GT(e.best_residuals().primal + e.best_residuals().dual + e.best_residuals().gap, 1e-8);
  }
}

TEST(Solve, RejectsBadOptions) {
  const auto inst = ppapep::build_pep(StepSchedule({1}), 1.0);
  EXPECT_THROW(ppapep::solve(inst, {0.0, 10}), std::invalid_argument);
  EXPECT_THROW(ppapep::solve(inst, {1e-8, 0}), std::invalid_argument);
}

TEST(RankProfile, Examples) {
  EXPECT_EQ(ppapep::rank_profile(Matrix::Zero(3, 3), 1e-5), 0);
  EXPECT_EQ(ppapep::rank_profile(Matrix::Identity(3, 3), 0.5), 3);
  const Vector v = Vector::LinSpaced(4, 1.0, 4.0);
  EXPECT_EQ(ppapep::rank_profile(Matrix(v * v.transpose()), 1e-9), 1);
}

TEST(SolutionJson, KeysDualsByTag) {
  const auto sol = ppapep::solve(ppapep::build_pep(StepSchedule({1, 1}), 1.0));
  const nlohmann::json j = sol;
  EXPECT_TRUE(j.contains("value"));
  EXPECT_TRUE(j.contains("residuals"));
  EXPECT_EQ(j.at("gram_eigenvalues").size(), 3u);
  EXPECT_NEAR(j.at("duals").at("Radius").get<double>(), 0.25, 1e-6);
}

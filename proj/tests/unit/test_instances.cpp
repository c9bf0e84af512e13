#include <gtest/gtest.h>

#include "ppapep/instances.hpp"

using ppapep::FunctionKind;
using ppapep::MetricKind;

TEST(Instances, NamesRoundTrip) {
  for (const auto kind : ppapep::kAllFunctionKinds) {
    EXPECT_EQ(ppapep::parse_function_kind(std::string(ppapep::to_string(kind))), kind);
  }
  EXPECT_THROW(ppapep::parse_function_kind("huber"), std::invalid_argument);
}

TEST(Instances, RadiusCoversTheMinimizer) {
  ppapep::Xoshiro256 rng(1);
  for (const auto kind : ppapep::kAllFunctionKinds) {
    for (const auto mk : {MetricKind::Identity, MetricKind::Scalar, MetricKind::Dense}) {
      for (int trial = 0; trial < 30; ++trial) {
        const auto inst = ppapep::random_instance(rng, kind, mk, {8, 4});
        ASSERT_TRUE(inst.function.minimizer().has_value());
        EXPECT_EQ(inst.function.family_name(), ppapep::to_string(kind));
        EXPECT_LE(inst.metric.norm(inst.x0 - *inst.function.minimizer()), inst.radius);
        EXPECT_GE(inst.schedule.size(), 1u);
        EXPECT_LE(inst.schedule.size(), 8u);
        const auto& x_star = *inst.function.minimizer();
        EXPECT_TRUE(std::isfinite(inst.function.value(x_star)));
      }
    }
  }
}

// No random point does better than the attached minimizer.
TEST(Instances, MinimizerIsOptimal) {
  ppapep::Xoshiro256 rng(2);
  for (const auto kind : ppapep::kAllFunctionKinds) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto inst = ppapep::random_instance(rng, kind, MetricKind::Identity, {4, 3});
      const auto& x_star = *inst.function.minimizer();
      const double f_star = inst.function.value(x_star);
      for (int k = 0; k < 50; ++k) {
        const ppapep::Vector y = x_star + random_normal_vector(rng, x_star.size());
        EXPECT_GE(inst.function.value(y), f_star - 1e-12) << to_string(kind);
      }
    }
  }
}

TEST(Instances, Deterministic) {
  ppapep::Xoshiro256 a(3), b(3);
  const auto x = ppapep::random_instance(a, FunctionKind::MaxAffine, MetricKind::Dense);
  const auto y = ppapep::random_instance(b, FunctionKind::MaxAffine, MetricKind::Dense);
  EXPECT_EQ(x.x0, y.x0);
  EXPECT_EQ(x.schedule.alphas(), y.schedule.alphas());
  EXPECT_EQ(x.radius, y.radius);
}

TEST(Instances, WhitenedKeepsTheRadius) {
  ppapep::Xoshiro256 rng(4);
  const auto inst = ppapep::random_instance(rng, FunctionKind::Box, MetricKind::Dense);
  const auto w = ppapep::whitened(inst);
  EXPECT_EQ(w.metric.kind(), ppapep::Metric::Kind::Identity);
  EXPECT_NEAR(w.radius, inst.radius, 1e-12 * inst.radius);
  EXPECT_LE((w.x0 - *w.function.minimizer()).norm(), w.radius);
}

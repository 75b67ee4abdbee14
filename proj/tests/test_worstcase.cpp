#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lastiter/rates.hpp"
#include "lastiter/solver.hpp"
#include "lastiter/worstcase.hpp"

using namespace lastiter;

TEST(LongStep, Geometry) {
  for (std::size_t N : {1u, 2u, 5u, 12u}) {
    const double h = 2.0 * constant_step_knee(N) + 0.1;
    const auto c = long_step_construction(N, h);
    ASSERT_EQ(c.xi.size(), N + 2);
    for (std::size_t k = 1; k <= N + 1; ++k) {
      EXPECT_NEAR(c.xi[k].norm(), 1.0, 1e-12);
      // Every piece passes through the origin, so its value at z^k is the inner product.
      EXPECT_NEAR(c.levels[k], c.xi[k].dot(c.z[k]), 1e-12);
    }
    for (std::size_t k = 1; k <= N; ++k) EXPECT_NEAR((c.z[k + 1] - (c.z[k] - h * c.xi[k])).norm(), 0.0, 1e-12);
  }
}

TEST(LongStep, MinimumIsZeroAtOrigin) {
  const Scenario sc = long_step_instance(7, 0.4);
  EXPECT_DOUBLE_EQ(sc.instance.value(Point::Zero(8)), 0.0);
  for (const Point& z : long_step_construction(7, 0.4).z) {
    if (z.size() == 0) continue;
    EXPECT_GE(sc.instance.value(z), -1e-15);
  }
}

TEST(LongStep, RealizesRate) {
  for (std::size_t N : {1u, 2u, 3u, 8u, 15u, 40u}) {
    const double knee = constant_step_knee(N);
    for (double factor : {1.001, 1.5, 4.0, 30.0}) {
      const double h = factor * knee;
      const Scenario sc = long_step_instance(N, h);
      const RunTrace t = run(sc.instance, StepSchedule::constant_normalized(h), sc.x1, N);
      EXPECT_NEAR(last_gap(t, sc.instance), constant_step_rate(N, h), 1e-9) << "N=" << N << " h=" << h;
      ASSERT_TRUE(sc.predicted_gap.has_value());
      EXPECT_NEAR(*sc.predicted_gap, constant_step_rate(N, h), 1e-15);
    }
  }
}

TEST(LongStep, RejectsShortSteps) {
  EXPECT_THROW(long_step_instance(4, constant_step_knee(4)), StepTooSmall);
  EXPECT_THROW(long_step_instance(4, 0.01), StepTooSmall);
  EXPECT_THROW(long_step_instance(0, 1.0), InvalidArgument);
}

TEST(Tightness, BothBranches) {
  for (std::size_t N = 1; N <= 10; ++N) {
    const double knee = constant_step_knee(N);
    for (double h : {0.2 * knee, knee, 1.2 * knee, 3.0 * knee, 1.0}) {
      const RateReport r = tightness_report(N, h);
      ASSERT_TRUE(r.observed_gap.has_value());
      EXPECT_NEAR(*r.observed_gap, r.predicted_bound, 1e-9) << "N=" << N << " h=" << h;
      EXPECT_TRUE(r.valid());
    }
  }
  EXPECT_EQ(tightness_report(3, 0.01).regime, "constant/short");
  EXPECT_EQ(tightness_report(3, 0.5).regime, "constant/long");
}

TEST(LemmaLast, RealizesH) {
  for (double h2 : {0.001, 0.02, 0.05, kNoUniversalBreak, 0.09, 0.15, 0.19428458093918248, 0.3, 1.0, 5.0}) {
    const Scenario sc = lemma_last(h2);
    const RunTrace t = run(sc.instance, StepSchedule::custom(lemma_last_steps(h2)), sc.x1, 2);
    EXPECT_NEAR(last_gap(t, sc.instance), no_universal_H(h2), 1e-10) << "h2=" << h2;
  }
  const Scenario first = lemma_last_i(0.05);
  const RunTrace t = run(first.instance, StepSchedule::custom(lemma_last_steps(0.05)), first.x1, 2);
  EXPECT_NEAR(last_gap(t, first.instance), 1.0 / std::numbers::sqrt2 - 0.05, 1e-15);
}

TEST(LemmaLast, SecondInstanceGeometry) {
  const Scenario sc = lemma_last_ii(0.3);
  for (std::size_t i = 1; i < sc.function.pieces(); ++i) EXPECT_NEAR(sc.function.slopes[i].norm(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(sc.instance.value(Point::Zero(3)), 0.0);
  EXPECT_NEAR(sc.instance.value(sc.x1), sc.function.slopes[1][0], 1e-12);
}

TEST(LemmaLast, WorstOverH2MatchesCertificate) {
  const auto cert = no_universal_certificate();
  double best = 1.0;
  for (double h2 = 0.15; h2 <= 0.25; h2 += 1e-5) {
    const Scenario sc = lemma_last(h2);
    const RunTrace t = run(sc.instance, StepSchedule::custom(lemma_last_steps(h2)), sc.x1, 2,
                           RecordMode::values_only);
    best = std::min(best, last_gap(t, sc.instance));
  }
  EXPECT_NEAR(best, cert.o, 1e-6);
}

TEST(LemmaLast, RangeChecks) {
  EXPECT_THROW(lemma_last_i(0.1), StepOutOfRange);
  EXPECT_THROW(lemma_last_i(0.0), StepOutOfRange);
  EXPECT_THROW(lemma_last_ii(0.05), StepOutOfRange);
  EXPECT_NO_THROW(lemma_last_i(kNoUniversalBreak));
  const auto steps = lemma_last_steps(0.2);
  EXPECT_DOUBLE_EQ(steps[0], 1.0 / (2.0 * std::numbers::sqrt2));
  EXPECT_DOUBLE_EQ(steps[1], 0.2);
}

TEST(Scenario, UnscriptedDropsScript) {
  const Scenario sc = long_step_instance(3, 0.5);
  EXPECT_FALSE(sc.function.scripted_choices.empty());
  const ProblemInstance p = sc.unscripted();
  EXPECT_EQ(p.f_star, sc.instance.f_star);
  EXPECT_NO_THROW(run(p, StepSchedule::optimal_last_iterate(3), sc.x1, 3));
}

TEST(RandomScenario, Reproducible) {
  const Scenario a = random_plmax_scenario(42, 6, 9, FeasibleSet::ball);
  const Scenario b = random_plmax_scenario(42, 6, 9, FeasibleSet::ball);
  EXPECT_EQ(a.x1, b.x1);
  ASSERT_EQ(a.function.pieces(), 10u);
  for (std::size_t i = 0; i < a.function.pieces(); ++i) EXPECT_EQ(a.function.slopes[i], b.function.slopes[i]);
  EXPECT_NEAR(a.x1.norm(), 1.0, 1e-15);
  EXPECT_TRUE(a.instance.is_feasible(a.x1));
}

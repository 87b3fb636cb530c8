#include <gtest/gtest.h>

#include <cmath>

#include "aogalloc/error.hpp"
#include "aogalloc/ergo.hpp"
#include "oracles.hpp"

using namespace aogalloc;

namespace {

RulaScoreTrace constant_trace(double g, double duration, std::size_t steps) {
  RulaScoreTrace tr;
  for (std::size_t i = 0; i <= steps; ++i) {
    ScoreSample s;
    s.t = duration * double(i) / double(steps);
    s.score.fill(g);
    tr.samples.push_back(s);
  }
  tr.sample_period = duration / double(steps);
  return tr;
}

WearVector uniform(double v) {
  WearVector w;
  w.values.fill(v);
  return w;
}

const double kC = capacity(3.0, 240.0, 0.993);

}  // namespace

TEST(Rula, NeutralPostureScoresOne) {
  const RulaBandTable t = RulaBandTable::standard();
  for (Joint j : kJoints) EXPECT_EQ(rula_score(j, t.joints[index(j)].neutral_deg, t), 1.0) << joint_name(j);
}

TEST(Rula, SaturatesAtSeven) {
  const RulaBandTable t = RulaBandTable::standard();
  for (Joint j : kJoints) {
    const auto& b = t.joints[index(j)];
    EXPECT_LE(rula_score(j, b.max_deg, t), 7.0);
    EXPECT_LE(rula_score(j, b.min_deg, t), 7.0);
    EXPECT_GE(rula_score(j, b.max_deg, t), 1.0);
  }
  EXPECT_NEAR(rula_score(Joint::shoulder, 180.0, t), 7.0, 0.01);
}

TEST(Rula, BreakpointIsBandMidpoint) {
  const RulaBandTable t = RulaBandTable::standard();
  // Shoulder bands 3 | 5 around 45 deg; elbow bands 1 | 7 around 60 deg.
  EXPECT_NEAR(rula_score(Joint::shoulder, 45.0, t), 4.0, 0.01);
  EXPECT_NEAR(rula_score(Joint::elbow, 60.0, t), 4.0, 0.01);
  EXPECT_NEAR(rula_score(Joint::trunk, 60.0, t), 5.5, 0.01);
}

TEST(Rula, AngleOutsideRangeRejected) {
  const RulaBandTable t = RulaBandTable::standard();
  EXPECT_THROW(rula_score(Joint::wrist, 120.0, t), Error);
}

TEST(Rula, ShoulderSweepIsMonotone) {
  const RulaBandTable t = RulaBandTable::standard();
  double prev = rula_score(Joint::shoulder, 0.0, t);
  for (double a = 0.1; a <= 120.0; a += 0.1) {
    const double g = rula_score(Joint::shoulder, a, t);
    EXPECT_GE(g, prev - 1e-12) << a;
    prev = g;
  }
}

TEST(Rula, StepChangeStaysWithinSlopeBound) {
  const RulaBandTable t = RulaBandTable::standard();
  AngleTrace tr;
  // 0 -> 90 deg shoulder flexion ramp over 1.5 s at 60 Hz.
  for (int i = 0; i <= 180; ++i) {
    AngleSample s;
    s.t = i / 60.0;
    s.degrees = {std::clamp((i - 60) * 1.0, 0.0, 90.0), 80.0, 0.0, 0.0, 0.0};
    tr.samples.push_back(s);
  }
  const RulaScoreTrace g = score_angle_trace(tr, t);
  const double bound = rula_lipschitz(Joint::shoulder, t);
  for (std::size_t i = 1; i < g.samples.size(); ++i) {
    const double dtheta = std::abs(tr.samples[i].degrees[0] - tr.samples[i - 1].degrees[0]);
    EXPECT_LE(std::abs(g.samples[i].score[0] - g.samples[i - 1].score[0]), bound * dtheta + 1e-12);
  }
  EXPECT_EQ(g.samples.front().score[1], 1.0);
}

TEST(Rula, NonIncreasingTimestampsRejected) {
  AngleTrace tr;
  tr.samples = {AngleSample{0.0, {}}, AngleSample{0.0, {}}};
  EXPECT_THROW(score_angle_trace(tr, RulaBandTable::standard()), Error);
}

TEST(Capacity, ClosedForm) {
  EXPECT_NEAR(capacity(3, 240, 0.993), 145.11, 0.01);
  EXPECT_NEAR(capacity(6, 240, 0.993), 290.21, 0.01);
  EXPECT_DOUBLE_EQ(capacity(6, 240, 0.993), 2 * capacity(3, 240, 0.993));
  EXPECT_DOUBLE_EQ(capacity(3, 240, 0.993), -720.0 / std::log(0.007));
  EXPECT_THROW(capacity(3, 240, 1.0), Error);
  EXPECT_THROW(capacity(3, 240, 0.0), Error);
}

TEST(IntegrateWear, SaturatesAfterEndurance) {
  const auto v = integrate_wear(uniform(0.0), constant_trace(3.0, 240.0, 240 * 60), kC);
  EXPECT_NEAR(v.back().values[0], 0.993, 0.001);
  EXPECT_EQ(v.front(), uniform(0.0));
}

TEST(IntegrateWear, HalfGapDecay) {
  const double t = kC * std::log(2.0) / 3.0;
  const auto v = integrate_wear(uniform(0.5), constant_trace(3.0, t, 100), kC);
  for (double x : v.back().values) EXPECT_NEAR(x, 0.75, 1e-6);
}

TEST(IntegrateWear, MatchesClosedFormAtEverySample) {
  const auto tr = constant_trace(4.5, 30.0, 30);
  const auto v = integrate_wear(uniform(0.2), tr, kC);
  ASSERT_EQ(v.size(), tr.samples.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    EXPECT_NEAR(v[i].values[3], oracle::charge(0.2, 4.5, tr.samples[i].t, kC), 1e-12);
}

TEST(IntegrateWear, BoundedAndIncreasing) {
  const auto v = integrate_wear(uniform(0.9), constant_trace(7.0, 5000.0, 500), kC);
  for (std::size_t i = 1; i < v.size(); ++i)
    for (std::size_t j = 0; j < kJointCount; ++j) {
      EXPECT_LT(v[i].values[j], 1.0);
      EXPECT_GE(v[i].values[j], v[i - 1].values[j]);
    }
  EXPECT_THROW(integrate_wear(uniform(1.0), constant_trace(1.0, 1.0, 1), kC), Error);
}

TEST(Recover, Discharge) {
  EXPECT_NEAR(recover(0.6, 240.0, 3.0, kC), 0.007 * 0.6, 1e-4);
  EXPECT_DOUBLE_EQ(recover(0.6, 0.0, 3.0, kC), 0.6);
  EXPECT_EQ(recover(0.0, 1000.0, 3.0, kC), 0.0);
  EXPECT_DOUBLE_EQ(recover(0.4, 17.0, 3.0, kC), oracle::discharge(0.4, 3.0, 17.0, kC));
  EXPECT_THROW(recover(0.4, -1.0, 3.0, kC), Error);
  const WearVector w = recover(uniform(0.5), 10.0, 3.0, kC);
  EXPECT_DOUBLE_EQ(w.t, 10.0);
}

TEST(Predict, IdentityAndZeroWear) {
  ActionModel m;
  m.action = "x";
  const WearVector w = uniform(0.37);
  EXPECT_EQ(predict(w, m).values, w.values);
  m.alpha = {0.9, 0.8, 0.7, 0.6, 0.5};
  const WearVector p = predict(uniform(0.0), m);
  for (std::size_t j = 0; j < kJointCount; ++j) EXPECT_DOUBLE_EQ(p.values[j], 1.0 - m.alpha[j]);
}

TEST(Predict, ConsistentWithSimulationUnderConstantScore) {
  for (double v0 : {0.0, 0.3, 0.9}) {
    for (double g : {1.0, 3.0, 7.0}) {
      for (double d : {1.0, 30.0, 200.0}) {
        ActionModel m;
        m.action = "x";
        m.alpha.fill(std::exp(-g * d / kC));
        const double simulated = integrate_wear(uniform(v0), constant_trace(g, d, 10), kC).back().values[0];
        EXPECT_NEAR(predict(uniform(v0), m).values[0], simulated, 1e-9);
      }
    }
  }
}

TEST(Gamma, BoundariesBelongToOuterBands) {
  const CostConfig c;
  EXPECT_EQ(gamma_of(0.25, c), 1.0);
  EXPECT_EQ(gamma_of(0.75, c), 100.0);
  EXPECT_EQ(gamma_of(0.5, c), 10.0);
  EXPECT_EQ(gamma_of(std::nextafter(0.25, 1.0), c), 10.0);
  EXPECT_EQ(gamma_of(std::nextafter(0.75, 0.0), c), 10.0);
  EXPECT_EQ(risk_level(0.0, c), RiskLevel::low);
  EXPECT_STREQ(to_string(RiskLevel::medium), "medium");
}

TEST(HumanCost, BandSums) {
  const CostConfig c;
  WearVector w;
  w.values = {0.5, 0.5, 0.5, 0.1, 0.1};
  EXPECT_EQ(human_cost(w, c), 32.0);
  EXPECT_EQ(human_cost(uniform(0.1), c), 5.0);
  EXPECT_EQ(human_cost(uniform(0.9), c), 500.0);
  CostConfig weighted = c;
  weighted.weights = {2, 1, 1, 1, 1};
  EXPECT_EQ(human_cost(uniform(0.9), weighted), 600.0);
}

TEST(CostConfig, DefaultsAreValid) {
  CostConfig c;
  EXPECT_NO_THROW(c.check());
  EXPECT_NEAR(c.capacity(), 145.108, 0.001);
  c.capacity_override = 100.0;
  EXPECT_EQ(c.capacity(), 100.0);
  c.v_th1 = 0.8;
  EXPECT_THROW(c.check(), Error);
}

TEST(Wear, CheckRejectsOutOfRange) {
  EXPECT_NO_THROW(check_wear(uniform(0.0)));
  EXPECT_THROW(check_wear(uniform(1.0)), Error);
  EXPECT_THROW(check_wear(uniform(-0.1)), Error);
}

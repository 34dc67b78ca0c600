#include "ram/baselines.hpp"
#include "scripted_rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ram;

namespace {

LogTarget standard_normal(std::size_t d) {
  return LogTarget(d, [](const Vector& x) { return -0.5 * x.squaredNorm(); }, "normal");
}

}  // namespace

TEST(TemperatureLadder, ValidatesTemperatures) {
  const auto p = GaussianProposal::isotropic(1, 1.0);
  EXPECT_THROW(TemperatureLadder::shared({2.0, 4.0}, p), std::invalid_argument);
  EXPECT_THROW(TemperatureLadder::shared({1.0, 3.0, 2.0}, p), std::invalid_argument);
  EXPECT_THROW(TemperatureLadder({1.0, 2.0}, {p}), std::invalid_argument);
  const auto g = TemperatureLadder::geometric(5, 2.0);
  EXPECT_EQ(g, (std::vector<double>{1, 2, 4, 8, 16}));
}

TEST(TemperatureLadder, SensorLadderScales) {
  const auto l = sensor_tt_ladder();
  ASSERT_EQ(l.top(), 3u);
  EXPECT_EQ(l.temps(), (std::vector<double>{1, 2, 4, 8}));
  for (std::size_t j = 1; j <= 3; ++j) {
    const double s = 0.9 * std::pow(1.2, static_cast<double>(j) - 1.0);
    EXPECT_NEAR(l.proposal(j).covariance()(0, 0), s * s, 1e-14);
    EXPECT_EQ(l.proposal(j).covariance()(0, 1), 0.0);
  }
}

TEST(ParallelTempering, FiveRungsWithOneSwapCostSevenEvaluations) {
  const LogTarget target = standard_normal(2);
  const auto ladder = TemperatureLadder::shared({1, 2, 4, 8, 16}, GaussianProposal::isotropic(2, 1.0));
  Rng rng(5);
  EvalCounter c;
  auto e = init_pt_ensemble(Vector::Zero(2), ladder, target, c);
  EXPECT_EQ(c.total(), 5u);
  for (int i = 0; i < 100; ++i) {
    const auto before = c.total();
    const auto r = pt_step(e, ladder, target, rng, c);
    ASSERT_EQ(r.evals, 7u);
    ASSERT_EQ(c.total() - before, 7u);
    ASSERT_EQ(r.swaps_proposed, 1u);
  }
  for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(e.logpi[j], target(e.states[j]));
}

TEST(ParallelTempering, SwapAcceptanceRule) {
  EXPECT_EQ(log_swap_acceptance(-1.0, -1.0, 1.0, 2.0), 0.0);
  // Hotter rung holds the better point: always swap.
  EXPECT_EQ(log_swap_acceptance(-5.0, -1.0, 1.0, 2.0), 0.0);
  EXPECT_NEAR(log_swap_acceptance(-1.0, -5.0, 1.0, 2.0), -2.0, 1e-15);
}

TEST(ParallelTempering, ColdRungSamplesTheTarget) {
  const LogTarget target = standard_normal(1);
  const auto ladder = TemperatureLadder::shared({1, 2, 4}, GaussianProposal::isotropic(1, 2.0));
  Rng rng(8);
  EvalCounter c;
  auto e = init_pt_ensemble(Vector::Zero(1), ladder, target, c);
  const int n = 100000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    pt_step(e, ladder, target, rng, c);
    sq += e.states[0][0] * e.states[0][0];
  }
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(TemperedTransitions, CostIsTwoEvaluationsPerHeatedRung) {
  const LogTarget target = standard_normal(2);
  Rng rng(12);
  for (std::size_t rungs : {2u, 4u, 6u}) {
    const auto ladder =
        TemperatureLadder::shared(TemperatureLadder::geometric(rungs, 2.0), GaussianProposal::isotropic(2, 1.0));
    EvalCounter c;
    MetropolisState s = init_metropolis_state(Vector::Zero(2), target, c);
    for (int i = 0; i < 50; ++i) {
      const auto r = tempered_transition_step(s, ladder, target, rng, c);
      ASSERT_EQ(r.evals, 2 * (rungs - 1));
    }
    EXPECT_EQ(c.total(), 1 + 50 * 2 * (rungs - 1));
  }
}

TEST(TemperedTransitions, AllRejectedExcursionHasRatioExactlyOneAndDoesNotMove) {
  const LogTarget target = standard_normal(1);
  const auto ladder = TemperatureLadder::shared({1, 2, 4, 8}, GaussianProposal::isotropic(1, 1.0));
  EvalCounter c;
  MetropolisState s = init_metropolis_state(Vector::Constant(1, 0.3), target, c);
  ScriptedRng rng;
  rng.normals = {4.0, 4.0, 4.0, 4.0, 4.0, 4.0};
  rng.uniforms = {0.99, 0.99, 0.99, 0.99, 0.99, 0.99, 0.5};
  const auto r = tempered_transition_step(s, ladder, target, rng, c);
  EXPECT_EQ(r.log_alpha, 0.0);
  EXPECT_TRUE(r.accepted);
  EXPECT_FALSE(r.moved);
  EXPECT_EQ(r.moves_up + r.moves_down, 0u);
  EXPECT_EQ(s.x[0], 0.3);
  EXPECT_TRUE(rng.uniforms.empty());
}

TEST(TemperedTransitions, NeedsAHeatedRung) {
  const LogTarget target = standard_normal(1);
  const auto ladder = TemperatureLadder::shared({1}, GaussianProposal::isotropic(1, 1.0));
  EvalCounter c;
  MetropolisState s = init_metropolis_state(Vector::Zero(1), target, c);
  Rng rng(1);
  EXPECT_THROW(tempered_transition_step(s, ladder, target, rng, c), std::invalid_argument);
}

TEST(TemperedTransitions, SamplesTheTarget) {
  const LogTarget target = standard_normal(1);
  const auto ladder = TemperatureLadder::shared({1, 2, 4}, GaussianProposal::isotropic(1, 1.5));
  Rng rng(21);
  EvalCounter c;
  MetropolisState s = init_metropolis_state(Vector::Zero(1), target, c);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    tempered_transition_step(s, ladder, target, rng, c);
    sum += s.x[0];
    sq += s.x[0] * s.x[0];
  }
  EXPECT_NEAR(sum / n, 0.0, 0.04);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

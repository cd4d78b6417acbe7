#include "lrl/dynamics.hpp"

#include <gtest/gtest.h>

#include "lrl/kuhn.hpp"

namespace {

lrl::Game matching_pennies() {
  return lrl::make_normal_form_game({{1.0, -1.0, -1.0, 1.0}, {-1.0, 1.0, 1.0, -1.0}}, {2, 2});
}

std::vector<lrl::OftrlLearner> make_learners(const lrl::Game& game, double eta, long T) {
  std::vector<lrl::OftrlLearner> learners;
  for (const auto& set : game.sets) {
    lrl::LearnerConfig cfg;
    cfg.eta = eta;
    cfg.horizon = static_cast<int>(T);
    cfg.constants = lrl::game_constants(game);
    learners.emplace_back(set, cfg);
  }
  return learners;
}

// Single-player trace with prescribed strategies and utilities; lifted
// iterates sit on the t = 1 face so the lifting identity is exact.
lrl::RunTrace handmade_trace(const std::vector<std::vector<double>>& xs,
                             const std::vector<std::vector<double>>& us) {
  lrl::RunTrace trace;
  trace.players = 1;
  trace.T = static_cast<long>(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    trace.strategies.push_back({xs[t]});
    trace.gradients.push_back({us[t]});
    trace.lifted.push_back({lrl::LiftedPoint{1.0, xs[t]}});
  }
  return trace;
}

TEST(Checkpoints, PowersOfTwoPlusFinal) {
  EXPECT_EQ(lrl::default_checkpoints(1024),
            (std::vector<long>{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024}));
  EXPECT_EQ(lrl::default_checkpoints(100),
            (std::vector<long>{1, 2, 4, 8, 16, 32, 64, 100}));
  EXPECT_EQ(lrl::default_checkpoints(1), (std::vector<long>{1}));
}

TEST(SelfPlay, FirstIterateIsUniform) {
  const auto game = matching_pennies();
  auto learners = make_learners(game, 1.0 / 256.0, 1);
  const std::vector<long> cps{1};
  const auto trace = lrl::run_self_play(game, learners, 1, cps);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(trace.strategies[0][static_cast<std::size_t>(i)][0], 0.5, 1e-9);
    EXPECT_NEAR(trace.strategies[0][static_cast<std::size_t>(i)][1], 0.5, 1e-9);
  }
  EXPECT_TRUE(trace.violations.empty());
}

TEST(SelfPlay, ZeroPayoffGameStaysPut) {
  const std::vector<double> zeros(4, 0.0);
  const auto game = lrl::make_normal_form_game({zeros, zeros}, {2, 2});
  auto learners = make_learners(game, 0.01, 32);
  const auto cps = lrl::default_checkpoints(32);
  const auto trace = lrl::run_self_play(game, learners, 32, cps);
  EXPECT_DOUBLE_EQ(lrl::path_length(trace, 32), 0.0);
  for (const auto& row : trace.checkpoints) {
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(row.external_regret[static_cast<std::size_t>(i)], 0.0, 1e-12);
      EXPECT_NEAR(row.lifted_regret[static_cast<std::size_t>(i)], 0.0, 1e-12);
    }
  }
  for (long t = 1; t < 32; ++t) {
    EXPECT_EQ(trace.strategies[static_cast<std::size_t>(t)], trace.strategies[0]);
  }
}

TEST(SelfPlay, DeterministicTraces) {
  const auto game = lrl::make_kuhn_game(2);
  const auto run = [&] {
    auto learners = make_learners(game, 0.5, 16);
    const auto cps = lrl::default_checkpoints(16);
    return lrl::run_self_play(game, learners, 16, cps);
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.strategies.size(), b.strategies.size());
  for (std::size_t t = 0; t < a.strategies.size(); ++t)
    EXPECT_EQ(a.strategies[t], b.strategies[t]);  // bit-identical
  ASSERT_EQ(a.checkpoints.size(), b.checkpoints.size());
  for (std::size_t k = 0; k < a.checkpoints.size(); ++k) {
    EXPECT_EQ(a.checkpoints[k].external_regret, b.checkpoints[k].external_regret);
    EXPECT_EQ(a.checkpoints[k].path_length, b.checkpoints[k].path_length);
  }
}

TEST(ExternalRegret, HandComputedValues) {
  const auto game = matching_pennies();
  {
    const auto trace = handmade_trace({{0.5, 0.5}}, {{1.0, 0.0}});
    EXPECT_NEAR(lrl::external_regret(trace, game, 0, 1), 0.5, 1e-12);
  }
  {
    const auto trace = handmade_trace({{0.5, 0.5}, {0.5, 0.5}}, {{1.0, 0.0}, {0.0, 1.0}});
    EXPECT_NEAR(lrl::external_regret(trace, game, 0, 2), 0.0, 1e-12);
  }
  {
    const auto trace = handmade_trace({{0.5, 0.5}}, {{0.0, 0.0}});
    EXPECT_NEAR(lrl::external_regret(trace, game, 0, 1), 0.0, 1e-12);
  }
}

TEST(LiftedRegret, MatchesClampedExternalRegret) {
  const auto game = matching_pennies();
  {
    const auto trace = handmade_trace({{0.5, 0.5}}, {{1.0, 0.0}});
    EXPECT_NEAR(lrl::lifted_regret(trace, game, 0, 1), 0.5, 1e-12);
  }
  {
    // Negative external regret clamps to zero in the lifted space.
    const auto trace = handmade_trace({{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {-1.0, 0.0}});
    EXPECT_NEAR(lrl::external_regret(trace, game, 0, 2), -1.0, 1e-12);
    EXPECT_NEAR(lrl::lifted_regret(trace, game, 0, 2), 0.0, 1e-12);
  }
  {
    const auto trace = handmade_trace({{0.5, 0.5}}, {{0.0, 0.0}});
    EXPECT_NEAR(lrl::lifted_regret(trace, game, 0, 1), 0.0, 1e-12);
  }
}

TEST(PathLength, HandComputedValues) {
  const auto game = matching_pennies();
  {
    const auto trace = handmade_trace({{0.5, 0.5}, {0.5, 0.5}}, {{0.0, 0.0}, {0.0, 0.0}});
    EXPECT_DOUBLE_EQ(lrl::path_length(trace, 2), 0.0);
  }
  {
    const auto trace = handmade_trace({{0.5, 0.5}, {0.55, 0.45}}, {{0.0, 0.0}, {0.0, 0.0}});
    EXPECT_NEAR(lrl::path_length(trace, 2), 0.01, 1e-15);
  }
}

TEST(Stability, HandComputedStep) {
  lrl::RunTrace trace;
  trace.players = 1;
  trace.T = 2;
  trace.lifted.push_back({lrl::LiftedPoint{1.0, {0.5, 0.5}}});
  trace.lifted.push_back({lrl::LiftedPoint{1.1, {0.45, 0.55}}});
  const auto worst = lrl::stability_report(trace);
  EXPECT_NEAR(worst[0], std::sqrt(0.01 + 0.01 + 0.01), 1e-12);

  lrl::RunTrace constant;
  constant.players = 1;
  constant.T = 2;
  constant.lifted.push_back({lrl::LiftedPoint{1.0, {0.5, 0.5}}});
  constant.lifted.push_back({lrl::LiftedPoint{1.0, {0.5, 0.5}}});
  EXPECT_DOUBLE_EQ(lrl::stability_report(constant)[0], 0.0);
}

TEST(SelfPlay, MonitorsHoldOnMatchingPennies) {
  const auto game = matching_pennies();
  const auto consts = lrl::game_constants(game);
  const double eta =
      lrl::recommended_learning_rate(consts.n, consts.B, consts.L, consts.l1);
  const long T = 256;
  auto learners = make_learners(game, eta, T);
  const auto cps = lrl::default_checkpoints(T);

  lrl::TheoryBounds bounds;
  bounds.eta = eta;
  bounds.epsilon = 1.0 / static_cast<double>(T);
  bounds.c = consts;
  bounds.max_dim = game.max_dim();
  lrl::MonitorOptions monitors;
  monitors.check_bounds = true;
  const auto trace = lrl::run_self_play(game, learners, T, cps, monitors, &bounds);
  EXPECT_TRUE(trace.violations.empty()) << trace.violations.front();

  // Driver-recorded step norms agree with the recomputed report.
  const auto report = lrl::stability_report(trace);
  std::vector<double> from_steps(2, 0.0);
  for (const auto& row : trace.step_norms)
    for (int i = 0; i < 2; ++i)
      from_steps[static_cast<std::size_t>(i)] =
          std::max(from_steps[static_cast<std::size_t>(i)], row[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 2; ++i)
    EXPECT_NEAR(report[static_cast<std::size_t>(i)], from_steps[static_cast<std::size_t>(i)],
                1e-15);

  // Regret identity at every checkpoint, against fresh recomputation.
  for (const auto& row : trace.checkpoints) {
    for (int i = 0; i < 2; ++i) {
      const double ext = lrl::external_regret(trace, game, i, row.t);
      const double lift = lrl::lifted_regret(trace, game, i, row.t);
      const double want = std::max(0.0, ext);
      EXPECT_LE(std::abs(lift - want), 1e-6 * std::max({1.0, std::abs(lift), std::abs(want)}));
    }
  }
}

TEST(SelfPlay, WarmStartedSolvesStayCheap) {
  // High-accuracy per-round solves across the acceptance games: after the
  // cold start, every warm-started Newton call finishes within 10 oracle
  // calls, including the fast-moving eta = 0.5 regime.
  struct Case {
    lrl::Game game;
    double eta;
  };
  std::vector<Case> cases;
  cases.push_back({matching_pennies(), 0.0});
  cases.push_back({lrl::make_kuhn_game(2), 0.0});
  cases.push_back({lrl::make_kuhn_game(2), 0.5});
  cases.push_back({lrl::make_kuhn_game(3), 0.0});
  cases.push_back({lrl::make_cournot_game(2.0, 1.0, {}, {{0.0, 1.0}, {0.0, 1.0}}), 0.0});
  for (auto& [game, eta_override] : cases) {
    const auto consts = lrl::game_constants(game);
    const double eta = eta_override > 0.0
                           ? eta_override
                           : lrl::recommended_learning_rate(consts.n, consts.B, consts.L,
                                                            consts.l1);
    std::vector<lrl::OftrlLearner> learners;
    for (const auto& set : game.sets) {
      lrl::LearnerConfig cfg;
      cfg.eta = eta;
      cfg.horizon = 64;
      cfg.epsilon = 2e-8;  // solver stopping decrement 1e-8
      cfg.constants = consts;
      learners.emplace_back(set, cfg);
    }
    for (long t = 1; t <= 64; ++t) {
      std::vector<std::vector<double>> profile;
      for (auto& l : learners) profile.push_back(l.next_strategy());
      const auto grads = game.gradients(profile);
      for (std::size_t i = 0; i < learners.size(); ++i) {
        if (t > 1) {
          EXPECT_LE(learners[i].last_solve_stats().iterations, 10);
        }
        learners[i].observe(grads[i]);
      }
    }
  }
}

TEST(SelfPlay, LearnerProtocolMismatchThrows) {
  const auto game = matching_pennies();
  auto learners = make_learners(game, 0.01, 8);
  learners.pop_back();
  const std::vector<long> cps{8};
  EXPECT_THROW(lrl::run_self_play(game, learners, 8, cps), std::invalid_argument);
}

TEST(SelfPlay, RunAbortedCarriesThePartialTrace) {
  // Learner and solver failures mid-run surface as RunAborted with the
  // rounds recorded so far attached.
  lrl::RunTrace partial;
  partial.players = 2;
  partial.T = 8;
  partial.strategies.push_back({{0.5, 0.5}, {0.5, 0.5}});
  const lrl::RunAborted aborted("round 2: solver failed", std::move(partial));
  EXPECT_EQ(aborted.partial_trace().strategies.size(), 1u);
  EXPECT_NE(std::string(aborted.what()).find("round 2"), std::string::npos);
}

TEST(SelfPlay, PathLengthIsNonDecreasingAcrossCheckpoints) {
  const auto game = lrl::make_kuhn_game(2);
  auto learners = make_learners(game, 0.5, 128);
  const auto cps = lrl::default_checkpoints(128);
  const auto trace = lrl::run_self_play(game, learners, 128, cps);
  double prev = 0.0;
  for (const auto& row : trace.checkpoints) {
    EXPECT_GE(row.path_length, prev);
    prev = row.path_length;
  }
}

TEST(LogSlope, RecoversSyntheticSlope) {
  std::vector<long> ts{1, 2, 4, 8, 16, 32, 64};
  std::vector<double> ys;
  for (long t : ts) ys.push_back(3.0 + 1.75 * std::log(static_cast<double>(t)));
  EXPECT_NEAR(lrl::log_slope(ts, ys), 1.75, 1e-12);
  const std::vector<long> single{4};
  const std::vector<double> one{2.0};
  EXPECT_DOUBLE_EQ(lrl::log_slope(single, one), 0.0);
}

}  // namespace

#include "lrl/solver.hpp"

#include <gtest/gtest.h>

#include <random>

#include "lrl/kuhn.hpp"
#include "test_util.hpp"

namespace {

lrl::OftrlObjective objective_with_drift(double eta, std::vector<double> drift) {
  lrl::OftrlObjective obj;
  obj.eta = eta;
  obj.drift = std::move(drift);
  return obj;
}

TEST(LocalNorms, HandComputedValues) {
  const std::vector<double> center{1.0, 0.5, 0.5};
  const std::vector<double> v{1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(lrl::local_norm(center, v), 3.0);
  EXPECT_DOUBLE_EQ(lrl::local_dual_norm(center, v), std::sqrt(1.5));
}

TEST(LocalNorms, CauchySchwarzAcrossThePair) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> c(0.1, 2.0), u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> center(4), a(4), b(4);
    for (int r = 0; r < 4; ++r) {
      center[static_cast<std::size_t>(r)] = c(rng);
      a[static_cast<std::size_t>(r)] = u(rng);
      b[static_cast<std::size_t>(r)] = u(rng);
    }
    double inner = 0.0;
    for (int r = 0; r < 4; ++r)
      inner += a[static_cast<std::size_t>(r)] * b[static_cast<std::size_t>(r)];
    EXPECT_LE(std::abs(inner),
              lrl::local_dual_norm(center, a) * lrl::local_norm(center, b) + 1e-12);
  }
}

TEST(NewtonSubproblem, CenterIsFixedWhenGradientVanishes) {
  // Drift chosen so the objective gradient is exactly zero at the center.
  const auto set = lrl::make_simplex_set(2);
  const std::vector<double> center{1.0, 0.5, 0.5};
  const double eta = 0.1;
  std::vector<double> drift(3);
  for (int r = 0; r < 3; ++r)
    drift[static_cast<std::size_t>(r)] = -1.0 / (eta * center[static_cast<std::size_t>(r)]);
  const auto prox = set.lifted_prox();
  const auto s = lrl::newton_model_minimizer(objective_with_drift(eta, drift), center, prox);
  for (int r = 0; r < 3; ++r)
    EXPECT_NEAR(s[static_cast<std::size_t>(r)], center[static_cast<std::size_t>(r)], 1e-12);
}

TEST(NewtonSubproblem, RegularizerOnlyKeepsAnalyticCenter) {
  const auto set = lrl::make_simplex_set(2);
  const std::vector<double> center{1.0, 0.5, 0.5};
  const auto obj = objective_with_drift(0.1, {0.0, 0.0, 0.0});
  const auto prox = set.lifted_prox();
  const auto s = lrl::newton_model_minimizer(obj, center, prox);
  for (int r = 0; r < 3; ++r)
    EXPECT_NEAR(s[static_cast<std::size_t>(r)], center[static_cast<std::size_t>(r)], 1e-12);

  // Grid oracle over the lifted simplex for the quadratic model.
  const auto grad = obj.gradient(center);
  const auto model = [&](double lam, double y1) {
    const double y2 = lam - y1;
    const double q0 = (lam - center[0]) / center[0];
    const double q1 = (y1 - center[1]) / center[1];
    const double q2 = (y2 - center[2]) / center[2];
    return grad[0] * lam + grad[1] * y1 + grad[2] * y2 + 0.5 * (q0 * q0 + q1 * q1 + q2 * q2);
  };
  const auto best = testutil::refined_grid_min(
      model, [](double lam, double y1) { return lam >= 0 && lam <= 1 && y1 >= 0 && y1 <= lam; },
      0.0, 1.0, 0.0, 1.0);
  EXPECT_NEAR(best.a, 1.0, 1e-6);
  EXPECT_NEAR(best.b, 0.5, 1e-6);
}

TEST(NewtonSubproblem, BeatsRandomFeasiblePoints) {
  const auto set = lrl::make_simplex_set(3);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> drift(4);
    for (auto& v : drift) v = u(rng);
    const auto obj = objective_with_drift(0.2, drift);
    const auto start = lrl::interior_start(set);
    const auto center = start.as_vector();
    const auto prox = set.lifted_prox();
    const auto s = lrl::newton_model_minimizer(obj, center, prox);
    const auto grad = obj.gradient(center);
    const auto model = [&](std::span<const double> z) {
      double v = 0.0;
      for (std::size_t r = 0; r < z.size(); ++r) {
        const double q = (z[r] - center[r]) / center[r];
        v += grad[r] * z[r] + 0.5 * q * q;
      }
      return v;
    };
    const double vs = model(s);
    for (int probe = 0; probe < 50; ++probe) {
      std::uniform_real_distribution<double> lam_dist(0.0, 1.0);
      const double lam = lam_dist(rng);
      auto x = testutil::random_treeplex_point(set.treeplex(), lam, rng);
      std::vector<double> z{lam};
      z.insert(z.end(), x.begin(), x.end());
      EXPECT_LE(vs, model(z) + 1e-10);
    }
  }
}

TEST(ProxNewton, ImmediateReturnAtOptimum) {
  const auto set = lrl::make_simplex_set(2);
  const auto obj = objective_with_drift(0.1, {0.0, 0.0, 0.0});
  const lrl::LiftedPoint opt{1.0, {0.5, 0.5}};
  const auto res = lrl::prox_newton(obj, set.lifted_prox(), opt, 1e-8);
  EXPECT_EQ(res.stats.iterations, 1);
  EXPECT_EQ(res.stats.damped_steps, 0);
  EXPECT_EQ(res.stats.full_steps, 0);
  EXPECT_NEAR(res.point.lam, 1.0, 1e-12);
}

TEST(ProxNewton, DampedStepUsesInverseOnePlusLambda) {
  const auto set = lrl::make_simplex_set(2);
  std::vector<double> drift{40.0, -25.0, 10.0};
  const auto obj = objective_with_drift(0.1, drift);
  const auto start = lrl::interior_start(set);
  const auto res = lrl::prox_newton(obj, set.lifted_prox(), start, 1e-8);
  ASSERT_GT(res.stats.iterations, 1);
  ASSERT_GT(res.stats.decrements[0], 0.2);

  // Replay the first damped step by hand.
  const auto center = start.as_vector();
  const auto s = lrl::newton_model_minimizer(obj, center, set.lifted_prox());
  std::vector<double> d(center.size());
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = s[r] - center[r];
  const double lam = lrl::local_norm(center, d);
  const double alpha = 1.0 / (1.0 + lam);
  std::vector<double> x1(center.size());
  for (std::size_t r = 0; r < d.size(); ++r) x1[r] = center[r] + alpha * d[r];
  EXPECT_NEAR(res.stats.objective_values[1], obj.value(x1), 1e-12);
}

TEST(ProxNewton, DampedPhaseDescends) {
  const auto set = lrl::make_simplex_set(3);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> drift(4);
    for (auto& v : drift) v = u(rng);
    const auto res =
        lrl::prox_newton(objective_with_drift(0.1, drift), set.lifted_prox(),
                         lrl::interior_start(set), 1e-8);
    for (int k = 0; k + 1 < res.stats.iterations; ++k) {
      if (res.stats.decrements[static_cast<std::size_t>(k)] > 0.2) {
        EXPECT_LT(res.stats.objective_values[static_cast<std::size_t>(k + 1)],
                  res.stats.objective_values[static_cast<std::size_t>(k)] + 1e-12);
      }
    }
  }
}

TEST(ProxNewton, IntervalConvergesToLogOptimum) {
  // X = [1, 2]: the regularizer-only optimum of the lifted set is (1, 2).
  const auto set = lrl::make_interval_set(1.0, 2.0);
  const auto obj = objective_with_drift(0.1, {0.0, 0.0});
  const double eps = 1e-8;
  const auto res = lrl::prox_newton(obj, set.lifted_prox(), lrl::interior_start(set), eps);
  const std::vector<double> opt{1.0, 2.0};
  std::vector<double> d{res.point.lam - 1.0, res.point.y[0] - 2.0};
  EXPECT_LE(lrl::local_norm(opt, d), 2 * eps);

  // Grid oracle over the lifted triangle.
  const auto best = testutil::refined_grid_min(
      [&](double lam, double y) { return obj.value(std::vector<double>{lam, y}); },
      [](double lam, double y) { return lam > 1e-9 && lam <= 1 && y >= lam && y <= 2 * lam; },
      0.0, 1.0, 0.0, 2.0);
  EXPECT_NEAR(best.a, 1.0, 1e-6);
  EXPECT_NEAR(best.b, 2.0, 1e-6);
}

TEST(ProxNewton, RespectsTheoreticalIterationCount) {
  const auto set = lrl::make_simplex_set(2);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  const double eps = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> drift(3);
    for (auto& v : drift) v = u(rng);
    const auto obj = objective_with_drift(0.1, drift);
    const auto res = lrl::prox_newton(obj, set.lifted_prox(), lrl::interior_start(set), eps);
    const double f0 = res.stats.objective_values.front();
    const double fstar = obj.value(res.point.as_vector());
    const double cap = std::floor((f0 - fstar) / 0.017) +
                       std::floor(1.5 * std::log(std::log(0.28 / eps))) + 2;
    EXPECT_LE(res.stats.iterations, cap);
  }
}

TEST(ProxNewton, WarmStartsFinishFast) {
  const auto set = lrl::make_simplex_set(2);
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  auto drift = std::vector<double>{1.0, -0.5, 0.25};
  auto warm = lrl::interior_start(set);
  for (int round = 0; round < 20; ++round) {
    const auto res =
        lrl::prox_newton(objective_with_drift(0.05, drift), set.lifted_prox(), warm, 1e-8);
    warm = res.point;
    if (round > 0) {
      EXPECT_LE(res.stats.iterations, 10);
    }
    for (auto& v : drift) v += u(rng) * 0.05;
  }
}

TEST(ProxNewton, HalvedDecrementMeetsTheDistanceContract) {
  // Stopping at decrement eps/2 puts the output within eps of the true
  // optimizer in the local norm at that optimizer; checked against a refined
  // grid oracle on the lifted interval.
  const auto set = lrl::make_interval_set(1.0, 2.0);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double eps = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const auto obj = objective_with_drift(0.1, {u(rng), u(rng)});
    const auto res =
        lrl::prox_newton(obj, set.lifted_prox(), lrl::interior_start(set), eps / 2.0);
    const auto best = testutil::refined_grid_min(
        [&](double lam, double y) { return obj.value(std::vector<double>{lam, y}); },
        [](double lam, double y) {
          return lam > 1e-12 && lam <= 1.0 && y >= lam && y <= 2.0 * lam;
        },
        0.0, 1.0, 0.0, 2.0, 10);
    const std::vector<double> opt{best.a, best.b};
    std::vector<double> d{res.point.lam - best.a, res.point.y[0] - best.b};
    EXPECT_LE(lrl::local_norm(opt, d), eps);
  }
}

TEST(ProxNewton, RejectsBadInputs) {
  const auto set = lrl::make_simplex_set(2);
  const auto obj = objective_with_drift(0.1, {0.0, 0.0, 0.0});
  EXPECT_THROW(lrl::prox_newton(obj, set.lifted_prox(), lrl::interior_start(set), 0.25),
               std::invalid_argument);
  EXPECT_THROW(lrl::prox_newton(obj, set.lifted_prox(), lrl::LiftedPoint{1.0, {0.5, 0.0}}, 1e-6),
               std::invalid_argument);
}

TEST(FrankWolfeNewton, ImmediateReturnAtOptimum) {
  const auto set = lrl::make_simplex_set(2);
  const auto obj = objective_with_drift(0.1, {0.0, 0.0, 0.0});
  const lrl::LiftedPoint opt{1.0, {0.5, 0.5}};
  auto lmo = [&set](std::span<const double> c) { return set.lifted_lmo(c); };
  const auto res = lrl::fw_newton(obj, lmo, opt, 1e-6);
  EXPECT_EQ(res.stats.iterations, 1);
}

TEST(FrankWolfeNewton, AgreesWithProxNewton) {
  const auto set = lrl::make_simplex_set(2);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto lmo = [&set](std::span<const double> c) { return set.lifted_lmo(c); };
  const double eps = 1e-5;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> drift(3);
    for (auto& v : drift) v = u(rng);
    const auto obj = objective_with_drift(0.1, drift);
    const auto a = lrl::prox_newton(obj, set.lifted_prox(), lrl::interior_start(set), eps);
    const auto b = lrl::fw_newton(obj, lmo, lrl::interior_start(set), eps);
    const auto za = a.point.as_vector();
    const auto zb = b.point.as_vector();
    std::vector<double> d(za.size());
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = zb[r] - za[r];
    EXPECT_LE(lrl::local_norm(za, d), 1e-4);
  }
}

TEST(FrankWolfeNewton, GapTraceDecays) {
  // Empirical regression of the inner loop on cold-started subproblems: the
  // duality gap falls by at least 10x across consecutive 100-iteration
  // windows, and the line-search step finishes these instances well within
  // the budget.
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto set = lrl::make_simplex_set(2 + trial % 3);
    std::vector<double> drift(static_cast<std::size_t>(set.dim) + 1);
    for (auto& v : drift) v = u(rng);
    const auto obj = objective_with_drift(0.1, drift);
    const auto center = lrl::interior_start(set).as_vector();
    auto lmo = [&set](std::span<const double> c) { return set.lifted_lmo(c); };
    std::vector<double> gaps;
    lrl::fw_model_minimize(obj.gradient(center), center, lmo, 1e-10, &gaps);
    EXPECT_LE(gaps.size(), 1000u);
    EXPECT_LE(gaps.back(), 1e-10);
    for (std::size_t w = 0; w + 200 <= gaps.size(); w += 100) {
      double hi = 0.0, lo = 0.0;
      for (std::size_t k = w; k < w + 100; ++k) hi = std::max(hi, gaps[k]);
      for (std::size_t k = w + 100; k < w + 200; ++k) lo = std::max(lo, gaps[k]);
      EXPECT_LE(lo, hi / 10.0);
    }
  }
}

TEST(InteriorStart, SimplexesAverageTheVertices) {
  const auto s2 = lrl::interior_start(lrl::make_simplex_set(2));
  EXPECT_DOUBLE_EQ(s2.lam, 1.0);
  EXPECT_DOUBLE_EQ(s2.y[0], 0.5);
  EXPECT_DOUBLE_EQ(s2.y[1], 0.5);
  const auto s3 = lrl::interior_start(lrl::make_simplex_set(3));
  for (double v : s3.y) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(InteriorStart, KuhnIsStrictlyPositive) {
  const auto game = lrl::make_kuhn_game(2);
  for (const auto& set : game.sets) {
    const auto p = lrl::interior_start(set);
    EXPECT_TRUE(p.strictly_positive());
  }
}

}  // namespace

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lrl/games.hpp"
#include "lrl/solver.hpp"

namespace lrl {

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Game constants the learner needs for its learning rate and adversarial
// check: player count, gradient bound, smoothness, and the max l1 norm over
// all strategy sets.
struct GameConstants {
  int n{1};
  double B{1.0};
  double L{1.0};
  double l1{1.0};
};

inline GameConstants game_constants(const Game& g) {
  return {g.players(), g.gradient_bound, g.smoothness, g.max_l1()};
}

enum class SolverKind { prox_newton, frank_wolfe };

struct LearnerConfig {
  double eta{0.0};
  int horizon{1};
  double epsilon{0.0};  // local-norm tolerance of the per-round solve; 0 = 1/T
  bool anytime_epsilon{false};  // use 1/t^2 instead of the fixed tolerance
  SolverKind solver{SolverKind::prox_newton};
  bool adversarial_guard{true};
  GameConstants constants{};
};

// The learning rate of the main regret guarantee.
inline double recommended_learning_rate(int n, double B, double L, double l1) {
  if (n < 1 || !(B > 0.0) || !(L > 0.0) || !(l1 > 0.0))
    throw std::invalid_argument("recommended_learning_rate: arguments must be positive");
  return std::min(1.0 / (256.0 * B * l1), 1.0 / (128.0 * static_cast<double>(n) * L * l1 * l1));
}

// Lifting of an observed utility against the played strategy: the first
// coordinate absorbs -<u, x>, making the lifted utility orthogonal to
// (1, x).
inline std::vector<double> lift_utility(std::span<const double> u, std::span<const double> x) {
  if (u.size() != x.size()) throw std::invalid_argument("lift_utility: dimension mismatch");
  std::vector<double> lifted(u.size() + 1);
  double inner = 0.0;
  for (std::size_t r = 0; r < u.size(); ++r) inner += u[r] * x[r];
  lifted[0] = -inner;
  std::copy(u.begin(), u.end(), lifted.begin() + 1);
  return lifted;
}

// One-way switch condition of the adversarial guard: the accumulated squared
// utility deviations exceed what self-play dynamics can produce by time t.
inline bool adversarial_threshold_exceeded(double deviation_sum, long t, double eta,
                                           const GameConstants& c, int dim) {
  if (t < 2) return false;
  const double n2L2 = static_cast<double>(c.n) * static_cast<double>(c.n) * c.L * c.L;
  const double bound = 6144.0 * n2L2 * eta * c.B * c.l1 * c.l1 * c.l1 +
                       1024.0 * n2L2 * static_cast<double>(dim + 1) * c.l1 * c.l1 *
                           std::log(static_cast<double>(t));
  return deviation_sum > bound;
}

// One player's uncoupled learner: optimistic FTRL with the logarithmic
// regularizer over the lifted strategy set, warm-started proximal Newton (or
// Frank-Wolfe Newton) solves, and a permanent fallback to projected online
// gradient ascent once the observed utilities look adversarial.
class OftrlLearner {
 public:
  OftrlLearner(StrategySet set, LearnerConfig cfg)
      : set_(std::move(set)),
        cfg_(cfg),
        prox_(set_.lifted_prox()),
        cum_lifted_(static_cast<std::size_t>(set_.dim) + 1, 0.0),
        prev_lifted_(static_cast<std::size_t>(set_.dim) + 1, 0.0) {
    if (!(cfg_.eta > 0.0)) throw std::invalid_argument("learner: eta must be positive");
    if (cfg_.horizon < 1) throw std::invalid_argument("learner: horizon must be at least 1");
    if (cfg_.epsilon == 0.0) cfg_.epsilon = 1.0 / static_cast<double>(cfg_.horizon);
    if (!(cfg_.epsilon > 0.0))
      throw std::invalid_argument("learner: epsilon must be positive");
  }

  int dim() const { return set_.dim; }
  const StrategySet& set() const { return set_; }
  double eta() const { return cfg_.eta; }
  double epsilon() const { return cfg_.epsilon; }
  bool adversarial_mode() const { return adversarial_mode_; }
  long switch_time() const { return switch_time_; }
  long round() const { return round_; }
  double deviation_sum() const { return deviation_sum_; }
  const NewtonStats& last_solve_stats() const { return last_stats_; }
  const std::vector<double>& cumulative_lifted_utility() const { return cum_lifted_; }
  const std::vector<double>& previous_lifted_utility() const { return prev_lifted_; }

  // Strategy for the current round; idempotent until the matching observe.
  const std::vector<double>& next_strategy() {
    if (pending_) return x_;
    if (adversarial_mode_) {
      x_ = fallback_point_;
      current_ = LiftedPoint{1.0, x_};
    } else {
      solve_oftrl();
    }
    pending_ = true;
    return x_;
  }

  // Lifted iterate backing the current strategy (valid after next_strategy).
  const LiftedPoint& current_lifted() const {
    if (!pending_) throw ProtocolError("current_lifted: no strategy outstanding");
    return current_;
  }

  void observe(std::span<const double> u) {
    if (!pending_) throw ProtocolError("observe: next_strategy was not called this round");
    if (static_cast<int>(u.size()) != dim())
      throw std::invalid_argument("observe: utility dimension mismatch");
    pending_ = false;
    ++round_;

    if (round_ >= 2) {
      double dev = 0.0;
      for (std::size_t r = 0; r < u.size(); ++r)
        dev = std::max(dev, std::abs(u[r] - last_utility_[r]));
      deviation_sum_ += dev * dev;
    }
    last_utility_.assign(u.begin(), u.end());

    if (adversarial_mode_) {
      fallback_update(u);
      return;
    }

    const std::vector<double> lifted = lift_utility(u, x_);
    for (std::size_t r = 0; r < lifted.size(); ++r) cum_lifted_[r] += lifted[r];
    prev_lifted_ = lifted;

    if (cfg_.adversarial_guard &&
        adversarial_threshold_exceeded(deviation_sum_, round_, cfg_.eta, cfg_.constants,
                                       dim())) {
      adversarial_mode_ = true;
      switch_time_ = round_ + 1;
      fallback_point_ = x_;
      fallback_round_ = 0;
    }
  }

 private:
  void solve_oftrl() {
    OftrlObjective obj;
    obj.eta = cfg_.eta;
    obj.drift.resize(cum_lifted_.size());
    for (std::size_t r = 0; r < obj.drift.size(); ++r)
      obj.drift[r] = cum_lifted_[r] + prev_lifted_[r];

    const LiftedPoint start = warm_ ? *warm_ : interior_start(set_);
    // The stopping decrement is half the target tolerance: Newton stopping
    // at decrement eps guarantees only a 2*eps distance to the optimizer in
    // its local norm. Clamped into the solver's precision range for very
    // short horizons.
    const double t = static_cast<double>(round_ + 1);
    const double eps = cfg_.anytime_epsilon ? 1.0 / (t * t) : cfg_.epsilon;
    const double tol = std::min(eps / 2.0, 0.1);
    NewtonResult res;
    if (cfg_.solver == SolverKind::prox_newton) {
      res = prox_newton(obj, prox_, start, tol);
    } else {
      auto lmo = [this](std::span<const double> c) { return set_.lifted_lmo(c); };
      res = fw_newton(obj, lmo, start, tol);
    }
    current_ = res.point;
    last_stats_ = std::move(res.stats);
    warm_ = current_;
    x_ = current_.strategy();
  }

  void fallback_update(std::span<const double> u) {
    ++fallback_round_;
    const double step = cfg_.constants.l1 /
                        (cfg_.constants.B * std::sqrt(static_cast<double>(fallback_round_)));
    std::vector<double> target(fallback_point_.size());
    for (std::size_t r = 0; r < target.size(); ++r)
      target[r] = fallback_point_[r] + step * u[r];
    fallback_point_ = fw_project(target);
  }

  // Euclidean projection onto the strategy set by 50 Frank-Wolfe steps with
  // exact line search, using only the linear maximization oracle.
  std::vector<double> fw_project(const std::vector<double>& p) const {
    std::vector<double> z = fallback_point_;
    std::vector<double> dir(z.size());
    for (int it = 0; it < 50; ++it) {
      for (std::size_t r = 0; r < z.size(); ++r) dir[r] = p[r] - z[r];
      const std::vector<double> v = set_.lmo(dir);
      double num = 0.0, den = 0.0;
      for (std::size_t r = 0; r < z.size(); ++r) {
        const double d = v[r] - z[r];
        num += dir[r] * d;
        den += d * d;
      }
      if (den <= 0.0 || num <= 0.0) break;
      const double gamma = std::min(1.0, num / den);
      for (std::size_t r = 0; r < z.size(); ++r) z[r] += gamma * (v[r] - z[r]);
    }
    return z;
  }

  StrategySet set_;
  LearnerConfig cfg_;
  LiftedProx prox_;

  std::vector<double> cum_lifted_;   // running sum of lifted utilities
  std::vector<double> prev_lifted_;  // optimistic prediction (last lifted utility)
  std::optional<LiftedPoint> warm_;
  LiftedPoint current_{1.0, {}};
  std::vector<double> x_;
  NewtonStats last_stats_;

  std::vector<double> last_utility_;
  double deviation_sum_{0.0};
  long round_{0};
  bool pending_{false};

  bool adversarial_mode_{false};
  long switch_time_{0};
  long fallback_round_{0};
  std::vector<double> fallback_point_;
};

}  // namespace lrl

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lrl/lifted.hpp"
#include "lrl/treeplex.hpp"

namespace lrl {

// Feasibility tolerance used when validating strategy profiles handed to the
// gradient oracle.
inline constexpr double kFeasibilityTol = 1e-9;

// A player's strategy set, shifted into the nonnegative orthant. Geometry is
// either a treeplex (simplex or sequence-form polytope) or a one-dimensional
// interval [lo, hi] with lo >= 0. `shift` records the translation applied at
// construction (internal coordinates = original + shift); gradients of the
// supported games are shift-invariant, so no utility correction is needed.
struct StrategySet {
  int dim{0};
  std::vector<double> shift;
  double l1{0.0};
  std::variant<Treeplex, std::pair<double, double>> geometry;

  bool is_treeplex() const { return std::holds_alternative<Treeplex>(geometry); }
  const Treeplex& treeplex() const { return std::get<Treeplex>(geometry); }
  const std::pair<double, double>& interval() const {
    return std::get<std::pair<double, double>>(geometry);
  }

  // Deterministic linear maximization oracle; ties resolve to the vertex
  // with the lexicographically smallest index.
  std::vector<double> lmo(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != dim)
      throw std::invalid_argument("lmo: objective dimension mismatch");
    for (double v : u)
      if (!std::isfinite(v)) throw std::invalid_argument("lmo: objective must be finite");
    if (is_treeplex()) return treeplex_lmo(treeplex(), u);
    const auto [lo, hi] = interval();
    return {u[0] > 0.0 ? hi : lo};
  }

  double lmo_value(std::span<const double> u) const {
    const auto x = lmo(u);
    double v = 0.0;
    for (std::size_t r = 0; r < x.size(); ++r) v += x[r] * u[r];
    return v;
  }

  // Max constraint violation of x against the set.
  double membership_residual(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim)
      throw std::invalid_argument("membership_residual: dimension mismatch");
    if (is_treeplex()) return treeplex_residual(treeplex(), x);
    const auto [lo, hi] = interval();
    return std::max(std::max(lo - x[0], x[0] - hi), 0.0);
  }

  LiftedProx lifted_prox() const {
    if (is_treeplex()) return make_treeplex_lifted_prox(make_lifted(treeplex()));
    const auto [lo, hi] = interval();
    return make_interval_lifted_prox(lo, hi);
  }

  // Linear maximization over the lifted set: the best of the origin and the
  // (1, x) face, preferring the origin on ties.
  double lifted_lmo_value(std::span<const double> c) const {
    if (static_cast<int>(c.size()) != dim + 1)
      throw std::invalid_argument("lifted_lmo: objective dimension mismatch");
    return std::max(0.0, c[0] + lmo_value(c.subspan(1)));
  }

  std::vector<double> lifted_lmo(std::span<const double> c) const {
    std::vector<double> z(static_cast<std::size_t>(dim) + 1, 0.0);
    if (static_cast<int>(c.size()) != dim + 1)
      throw std::invalid_argument("lifted_lmo: objective dimension mismatch");
    const auto x = lmo(c.subspan(1));
    double v = c[0];
    for (std::size_t r = 0; r < x.size(); ++r) v += x[r] * c[1 + r];
    if (v > 0.0) {
      z[0] = 1.0;
      std::copy(x.begin(), x.end(), z.begin() + 1);
    }
    return z;
  }
};

namespace detail {

// Shared construction tail: computes the l1 bound from the all-ones LMO and
// rejects sets with an identically-zero coordinate, which the lifting cannot
// support.
inline void finish_strategy_set(StrategySet& s) {
  const std::vector<double> ones(static_cast<std::size_t>(s.dim), 1.0);
  s.l1 = s.lmo_value(ones);
  std::vector<double> e(static_cast<std::size_t>(s.dim), 0.0);
  for (int r = 0; r < s.dim; ++r) {
    e[static_cast<std::size_t>(r)] = 1.0;
    const auto v = s.lmo(e);
    if (!(v[static_cast<std::size_t>(r)] > 1e-12))
      throw std::invalid_argument("strategy set: coordinate " + std::to_string(r) +
                                  " is identically zero over the set");
    e[static_cast<std::size_t>(r)] = 0.0;
  }
}

}  // namespace detail

inline StrategySet make_treeplex_set(Treeplex tp) {
  StrategySet s;
  s.dim = tp.dim();
  s.shift.assign(static_cast<std::size_t>(s.dim), 0.0);
  s.geometry = std::move(tp);
  detail::finish_strategy_set(s);
  return s;
}

inline StrategySet make_simplex_set(int k) { return make_treeplex_set(make_simplex(k)); }

// Interval set; negative lower ends are shifted to the origin.
inline StrategySet make_interval_set(double lo, double hi) {
  if (!(hi > lo) && !(hi == lo))
    throw std::invalid_argument("interval set: need lo <= hi");
  StrategySet s;
  s.dim = 1;
  const double shift = lo < 0.0 ? -lo : 0.0;
  s.shift = {shift};
  s.geometry = std::make_pair(lo + shift, hi + shift);
  detail::finish_strategy_set(s);
  return s;
}

// An n-player game with concave utilities: per-player strategy sets, a
// re-entrant joint gradient oracle, and the constants of the smoothness
// assumption (|grad|_inf <= B everywhere; L-smoothness in l1 distance).
// Immutable after construction.
struct Game {
  std::vector<StrategySet> sets;
  std::function<std::vector<std::vector<double>>(const std::vector<std::vector<double>>&)>
      gradient_fn;
  double gradient_bound{0.0};  // B
  double smoothness{0.0};      // L

  int players() const { return static_cast<int>(sets.size()); }

  double max_l1() const {
    double m = 0.0;
    for (const auto& s : sets) m = std::max(m, s.l1);
    return m;
  }

  int max_dim() const {
    int m = 0;
    for (const auto& s : sets) m = std::max(m, s.dim);
    return m;
  }

  std::vector<std::vector<double>> gradients(
      const std::vector<std::vector<double>>& profile) const {
    if (static_cast<int>(profile.size()) != players())
      throw std::invalid_argument("gradients: profile has wrong player count");
    for (int i = 0; i < players(); ++i) {
      if (sets[static_cast<std::size_t>(i)].membership_residual(profile[static_cast<std::size_t>(i)]) >
          kFeasibilityTol)
        throw std::invalid_argument("gradients: infeasible strategy for player " +
                                    std::to_string(i));
    }
    return gradient_fn(profile);
  }
};

// ----- Normal-form games -------------------------------------------------

// One flat payoff tensor per player over the joint action space, row-major
// in player order, entries in [-1, 1]. Strategy sets are simplexes and the
// normalization gives B = 1, L = 1.
inline Game make_normal_form_game(std::vector<std::vector<double>> tensors,
                                  std::vector<int> actions) {
  const int n = static_cast<int>(actions.size());
  if (n < 1 || static_cast<int>(tensors.size()) != n)
    throw std::invalid_argument("normal form: one payoff tensor per player");
  std::size_t cells = 1;
  for (int a : actions) {
    if (a < 1) throw std::invalid_argument("normal form: empty action set");
    cells *= static_cast<std::size_t>(a);
  }
  for (const auto& t : tensors) {
    if (t.size() != cells)
      throw std::invalid_argument("normal form: tensor shape mismatch");
    for (double v : t)
      if (!(v >= -1.0 && v <= 1.0))
        throw std::invalid_argument("normal form: payoffs must lie in [-1, 1]");
  }

  Game g;
  for (int a : actions) g.sets.push_back(make_simplex_set(a));
  g.gradient_bound = 1.0;
  g.smoothness = 1.0;
  g.gradient_fn = [tensors = std::move(tensors), actions = std::move(actions), n,
                   cells](const std::vector<std::vector<double>>& x) {
    std::vector<std::vector<double>> grad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      grad[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(actions[static_cast<std::size_t>(i)]), 0.0);
    std::vector<int> joint(static_cast<std::size_t>(n), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      std::size_t rest = cell;
      for (int i = n - 1; i >= 0; --i) {
        joint[static_cast<std::size_t>(i)] =
            static_cast<int>(rest % static_cast<std::size_t>(actions[static_cast<std::size_t>(i)]));
        rest /= static_cast<std::size_t>(actions[static_cast<std::size_t>(i)]);
      }
      for (int i = 0; i < n; ++i) {
        double others = 1.0;
        for (int j = 0; j < n; ++j) {
          if (j != i) others *= x[static_cast<std::size_t>(j)][static_cast<std::size_t>(joint[static_cast<std::size_t>(j)])];
        }
        grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(joint[static_cast<std::size_t>(i)])] +=
            tensors[static_cast<std::size_t>(i)][cell] * others;
      }
    }
    return grad;
  };
  return g;
}

// ----- Linear Cournot competition ----------------------------------------

// Firm i picks a quantity s_i from an interval; price a - b * sum(s); linear
// production costs. The gradient of firm i's profit is
// a - b * sum(s) - b * s_i - cost_i, so B = a (attained at the origin when
// quantities stay in the price-positive range) and L = 2b: a unit l1 move of
// any opponent changes the gradient by at most b, plus b again for the
// firm's own quantity appearing twice.
inline Game make_cournot_game(double a, double b, std::vector<double> costs,
                              std::vector<std::pair<double, double>> intervals) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("cournot: price parameters must be positive");
  const int n = static_cast<int>(intervals.size());
  if (n < 1) throw std::invalid_argument("cournot: need at least one firm");
  if (costs.empty()) costs.assign(static_cast<std::size_t>(n), 0.0);
  if (static_cast<int>(costs.size()) != n)
    throw std::invalid_argument("cournot: one cost coefficient per firm");

  Game g;
  for (const auto& [lo, hi] : intervals) {
    if (lo < 0.0) throw std::invalid_argument("cournot: quantity intervals start at >= 0");
    g.sets.push_back(make_interval_set(lo, hi));
  }
  g.gradient_bound = a;
  g.smoothness = 2.0 * b;
  g.gradient_fn = [a, b, costs = std::move(costs), n](const std::vector<std::vector<double>>& x) {
    double total = 0.0;
    for (const auto& xi : x) total += xi[0];
    std::vector<std::vector<double>> grad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      grad[static_cast<std::size_t>(i)] = {a - b * total - b * x[static_cast<std::size_t>(i)][0] -
                                           costs[static_cast<std::size_t>(i)]};
    return grad;
  };
  return g;
}

}  // namespace lrl

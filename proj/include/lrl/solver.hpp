#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrl/games.hpp"
#include "lrl/lifted.hpp"

namespace lrl {

// The regularized leader objective over the lifted set,
//
//   f(z) = -eta * <drift, z> - sum_r log z[r],
//
// where drift is the accumulated lifted utility plus the optimistic
// prediction. Self-concordant on the positive orthant.
struct OftrlObjective {
  double eta{0.0};
  std::vector<double> drift;

  int dim() const { return static_cast<int>(drift.size()); }

  double value(std::span<const double> z) const {
    double v = 0.0;
    for (std::size_t r = 0; r < z.size(); ++r) v += -eta * drift[r] * z[r] - std::log(z[r]);
    return v;
  }

  std::vector<double> gradient(std::span<const double> z) const {
    std::vector<double> g(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) g[r] = -eta * drift[r] - 1.0 / z[r];
    return g;
  }
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_decrement, long iterations)
      : std::runtime_error(what), last_decrement_(last_decrement), iterations_(iterations) {}
  double last_decrement() const { return last_decrement_; }
  long iterations() const { return iterations_; }

 private:
  double last_decrement_;
  long iterations_;
};

struct NewtonStats {
  int iterations{0};  // number of subproblem solves
  int damped_steps{0};
  int full_steps{0};
  int clamped_coordinates{0};
  double final_decrement{0.0};
  std::vector<double> decrements;        // lambda_k per iteration
  std::vector<double> objective_values;  // f(x_k) entering iteration k
};

struct NewtonResult {
  LiftedPoint point;
  NewtonStats stats;
};

// Minimizer over the lifted set of the second-order model of f at `center`:
// one proximal-oracle call, since the Hessian of the log regularizer at z is
// exactly diag(1/z^2).
inline std::vector<double> newton_model_minimizer(const OftrlObjective& obj,
                                                  std::span<const double> center,
                                                  const LiftedProx& prox) {
  return prox.solve(obj.gradient(center), center);
}

using SubproblemSolver =
    std::function<std::vector<double>(std::span<const double>, std::span<const double>)>;

namespace detail {

// Damped proximal Newton: damped steps with alpha = 1/(1 + lambda) while the
// decrement exceeds sigma = 0.2, full steps down to the target precision.
// The iteration cap is ten times the worst-case count
// floor((f(x0) - f*)/0.017) + floor(1.5 ln ln(0.28/eps)) + 2, with the
// running best objective standing in for the unknown f*.
inline NewtonResult newton_loop(const OftrlObjective& obj, const SubproblemSolver& solve,
                                const LiftedPoint& start, double eps) {
  if (!(eps > 0.0) || !(eps < 0.2))
    throw std::invalid_argument("newton: precision must lie in (0, 0.2)");
  if (!start.strictly_positive())
    throw std::invalid_argument("newton: start must be strictly positive");

  std::vector<double> z = start.as_vector();
  NewtonStats stats;
  const double f0 = obj.value(z);
  double f_best = f0;
  const double quad_phase = std::floor(1.5 * std::log(std::log(0.28 / eps)));

  for (;;) {
    ++stats.iterations;
    stats.objective_values.push_back(obj.value(z));
    const std::vector<double> s = solve(obj.gradient(z), z);
    std::vector<double> d(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) d[r] = s[r] - z[r];
    const double lam = local_norm(z, d);
    stats.decrements.push_back(lam);
    stats.final_decrement = lam;

    if (lam > 0.2) {
      const double alpha = 1.0 / (1.0 + lam);
      for (std::size_t r = 0; r < z.size(); ++r) {
        z[r] += alpha * d[r];
        if (z[r] < 1e-300) {
          z[r] = 1e-300;
          ++stats.clamped_coordinates;
        }
      }
      ++stats.damped_steps;
    } else if (lam > eps) {
      for (std::size_t r = 0; r < z.size(); ++r) z[r] += d[r];
      ++stats.full_steps;
    } else {
      return {LiftedPoint::from_vector(z), std::move(stats)};
    }

    f_best = std::min(f_best, obj.value(z));
    const double cap =
        10.0 * (std::floor((f0 - f_best) / 0.017) + std::max(0.0, quad_phase) + 2.0);
    if (stats.iterations > std::max(16.0, cap))
      throw SolverError("proximal Newton failed to reach the target decrement", lam,
                        stats.iterations);
  }
}

}  // namespace detail

inline NewtonResult prox_newton(const OftrlObjective& obj, const LiftedProx& prox,
                                const LiftedPoint& start, double eps) {
  return detail::newton_loop(obj, prox.solve, start, eps);
}

// Frank-Wolfe inner loop for one Newton subproblem: vanilla conditional
// gradient over the lifted set until the duality gap drops below `gap_tol`,
// with the exact line-search step (closed form for the quadratic model). The
// iterate starts at the model center, so warm-started subproblems can return
// without stepping.
inline std::vector<double> fw_model_minimize(
    std::span<const double> gtilde, std::span<const double> w,
    const std::function<std::vector<double>(std::span<const double>)>& lifted_lmo,
    double gap_tol, std::vector<double>* gap_trace = nullptr) {
  if (!(gap_tol > 0.0)) throw std::invalid_argument("frank-wolfe: gap tolerance must be positive");
  std::vector<double> z(w.begin(), w.end());
  std::vector<double> grad(z.size()), neg(z.size());
  double diameter_sq = 1.0;
  for (long k = 0;; ++k) {
    for (std::size_t r = 0; r < z.size(); ++r) {
      grad[r] = gtilde[r] + (z[r] - w[r]) / (w[r] * w[r]);
      neg[r] = -grad[r];
    }
    const std::vector<double> v = lifted_lmo(neg);
    double gap = 0.0;
    double curv = 0.0;
    for (std::size_t r = 0; r < z.size(); ++r) {
      const double d = v[r] - z[r];
      gap += grad[r] * (z[r] - v[r]);
      curv += d * d / (w[r] * w[r]);
    }
    if (gap_trace) gap_trace->push_back(gap);
    if (gap <= gap_tol) return z;

    diameter_sq = std::max(diameter_sq, curv);
    const double gamma = curv > 0.0 ? std::min(1.0, gap / curv) : 1.0;
    for (std::size_t r = 0; r < z.size(); ++r) z[r] += gamma * (v[r] - z[r]);

    const double cap = std::max(1e4, 16.0 * diameter_sq / gap_tol);
    if (static_cast<double>(k) > cap)
      throw SolverError("frank-wolfe inner loop exceeded its iteration budget", gap, k);
  }
}

// Same contract as prox_newton with the proximal oracle replaced by
// Frank-Wolfe over a linear maximization oracle; each subproblem is solved
// to duality gap eps^2 / 4.
inline NewtonResult fw_newton(
    const OftrlObjective& obj,
    const std::function<std::vector<double>(std::span<const double>)>& lifted_lmo,
    const LiftedPoint& start, double eps) {
  const double gap_tol = eps * eps / 4.0;
  SubproblemSolver solve = [&lifted_lmo, gap_tol](std::span<const double> g,
                                                  std::span<const double> w) {
    return fw_model_minimize(g, w, lifted_lmo, gap_tol);
  };
  return detail::newton_loop(obj, solve, start, eps);
}

// Strictly positive interior point (1, x) of the lifted set, with x the
// average of the coordinate-wise best responses.
inline LiftedPoint interior_start(const StrategySet& set) {
  LiftedPoint p;
  p.lam = 1.0;
  p.y.assign(static_cast<std::size_t>(set.dim), 0.0);
  std::vector<double> e(static_cast<std::size_t>(set.dim), 0.0);
  for (int r = 0; r < set.dim; ++r) {
    e[static_cast<std::size_t>(r)] = 1.0;
    const auto v = set.lmo(e);
    for (std::size_t s = 0; s < p.y.size(); ++s) p.y[s] += v[s] / static_cast<double>(set.dim);
    e[static_cast<std::size_t>(r)] = 0.0;
  }
  for (double v : p.y) {
    if (!(v > 0.0))
      throw std::runtime_error("interior_start: set has a coordinate stuck at zero");
  }
  return p;
}

}  // namespace lrl

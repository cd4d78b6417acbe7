#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrl/games.hpp"
#include "lrl/learner.hpp"

namespace lrl {

struct ConfigEcho {
  double eta{0.0};
  double epsilon{0.0};
  std::string solver;
  long seed{0};
};

struct CheckpointRow {
  long t{0};
  std::vector<double> external_regret;  // per player
  std::vector<double> lifted_regret;    // per player
  double path_length{0.0};              // summed over players
  std::vector<double> stability_max;    // per player, running max
};

// Full record of a self-play run: per-round strategies, gradients, and
// lifted iterates, plus the checkpoint metrics and any monitor violations.
struct RunTrace {
  int players{0};
  long T{0};
  std::vector<std::vector<std::vector<double>>> strategies;  // [t][i][r]
  std::vector<std::vector<std::vector<double>>> gradients;   // [t][i][r]
  std::vector<std::vector<LiftedPoint>> lifted;              // [t][i]
  std::vector<std::vector<double>> step_norms;               // [t-1][i], local-norm steps
  std::vector<CheckpointRow> checkpoints;
  ConfigEcho config;
  std::vector<std::string> violations;
};

// Power-of-two checkpoints plus the final horizon.
inline std::vector<long> default_checkpoints(long T) {
  std::vector<long> out;
  for (long t = 1; t <= T; t *= 2) out.push_back(t);
  if (out.empty() || out.back() != T) out.push_back(T);
  return out;
}

// Best fixed strategy in hindsight minus realized utility, through round t.
// One LMO call on the summed utilities.
inline double external_regret(const RunTrace& trace, const Game& game, int player, long t) {
  if (t < 1 || t > trace.T) throw std::invalid_argument("external_regret: bad horizon");
  const auto& set = game.sets[static_cast<std::size_t>(player)];
  std::vector<double> total_u(static_cast<std::size_t>(set.dim), 0.0);
  double realized = 0.0;
  for (long tau = 0; tau < t; ++tau) {
    const auto& u = trace.gradients[static_cast<std::size_t>(tau)][static_cast<std::size_t>(player)];
    const auto& x = trace.strategies[static_cast<std::size_t>(tau)][static_cast<std::size_t>(player)];
    for (std::size_t r = 0; r < u.size(); ++r) {
      total_u[r] += u[r];
      realized += u[r] * x[r];
    }
  }
  return set.lmo_value(total_u) - realized;
}

// Regret of the internal lifted-space learner, computed with the lifted LMO.
// Equals max{0, external regret} up to floating error.
inline double lifted_regret(const RunTrace& trace, const Game& game, int player, long t) {
  if (t < 1 || t > trace.T) throw std::invalid_argument("lifted_regret: bad horizon");
  const auto& set = game.sets[static_cast<std::size_t>(player)];
  std::vector<double> total(static_cast<std::size_t>(set.dim) + 1, 0.0);
  double realized = 0.0;
  for (long tau = 0; tau < t; ++tau) {
    const auto& u = trace.gradients[static_cast<std::size_t>(tau)][static_cast<std::size_t>(player)];
    const auto& x = trace.strategies[static_cast<std::size_t>(tau)][static_cast<std::size_t>(player)];
    const auto& p = trace.lifted[static_cast<std::size_t>(tau)][static_cast<std::size_t>(player)];
    const std::vector<double> lifted = lift_utility(u, x);
    total[0] += lifted[0];
    realized += lifted[0] * p.lam;
    for (std::size_t r = 0; r < u.size(); ++r) {
      total[1 + r] += lifted[1 + r];
      realized += lifted[1 + r] * p.y[r];
    }
  }
  return set.lifted_lmo_value(total) - realized;
}

// Second-order path length through round t: sum over players of the squared
// l1 strategy moves.
inline double path_length(const RunTrace& trace, long t) {
  if (t < 1 || t > trace.T) throw std::invalid_argument("path_length: bad horizon");
  double total = 0.0;
  for (long tau = 0; tau + 1 < t; ++tau) {
    for (int i = 0; i < trace.players; ++i) {
      const auto& a = trace.strategies[static_cast<std::size_t>(tau)][static_cast<std::size_t>(i)];
      const auto& b = trace.strategies[static_cast<std::size_t>(tau + 1)][static_cast<std::size_t>(i)];
      double l1 = 0.0;
      for (std::size_t r = 0; r < a.size(); ++r) l1 += std::abs(b[r] - a[r]);
      total += l1 * l1;
    }
  }
  return total;
}

// Largest local-norm step between consecutive lifted iterates, per player,
// recomputed from the recorded iterates.
inline std::vector<double> stability_report(const RunTrace& trace) {
  std::vector<double> worst(static_cast<std::size_t>(trace.players), 0.0);
  for (std::size_t t = 1; t < trace.lifted.size(); ++t) {
    for (int i = 0; i < trace.players; ++i) {
      const auto prev = trace.lifted[t - 1][static_cast<std::size_t>(i)].as_vector();
      const auto cur = trace.lifted[t][static_cast<std::size_t>(i)].as_vector();
      std::vector<double> d(cur.size());
      for (std::size_t r = 0; r < d.size(); ++r) d[r] = cur[r] - prev[r];
      worst[static_cast<std::size_t>(i)] =
          std::max(worst[static_cast<std::size_t>(i)], local_norm(prev, d));
    }
  }
  return worst;
}

struct MonitorOptions {
  bool check_identity{true};     // lifted regret == max{0, external} at checkpoints
  bool check_bounds{false};      // regret and path-length bounds (recommended eta only)
  bool check_stability{true};    // multiplicative stability at every step
  double identity_rtol{1e-6};
};

// A learner or solver failure mid-run; carries whatever was recorded before
// the failing round.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, RunTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RunTrace& partial_trace() const { return partial_; }

 private:
  RunTrace partial_;
};

namespace detail {

inline bool identity_holds(double lifted, double external, double rtol) {
  const double want = std::max(0.0, external);
  const double scale = std::max({1.0, std::abs(lifted), std::abs(want)});
  return std::abs(lifted - want) <= rtol * scale;
}

}  // namespace detail

// Theorem-style ceilings used by the monitors and the acceptance suite.
struct TheoryBounds {
  double eta{0.0};
  double epsilon{0.0};
  GameConstants c{};
  int max_dim{0};

  // Per-player regret ceiling at horizon t, including the oracle slack for
  // epsilon-accurate solves.
  double regret_bound(long t, int dim) const {
    const double log_t = std::log(static_cast<double>(std::max<long>(t, 2)));
    return 12.0 * c.B * c.l1 +
           256.0 * static_cast<double>(dim + 1) *
               std::max(static_cast<double>(c.n) * c.L * c.l1 * c.l1, 2.0 * c.B * c.l1) * log_t +
           4.0 * static_cast<double>(t) * epsilon;
  }

  double path_length_bound(long t) const {
    const double log_t = std::log(static_cast<double>(std::max<long>(t, 2)));
    return 6144.0 * static_cast<double>(c.n) * eta * c.B * c.l1 * c.l1 * c.l1 +
           1024.0 * static_cast<double>(c.n) * static_cast<double>(max_dim + 1) * c.l1 * c.l1 *
               log_t;
  }

  // Multiplicative stability in rescaled units plus the solve tolerance.
  double stability_bound() const { return 22.0 * eta * c.B * c.l1 + 3.0 * epsilon; }
};

// Synchronous self-play: one round barrier collects every learner's
// strategy, the joint gradient oracle runs once, and each learner sees only
// its own gradient. Deterministic for fixed configurations.
inline RunTrace run_self_play(const Game& game, std::vector<OftrlLearner>& learners, long T,
                              std::span<const long> checkpoints,
                              const MonitorOptions& monitors = {},
                              const TheoryBounds* bounds = nullptr) {
  const int n = game.players();
  if (static_cast<int>(learners.size()) != n)
    throw std::invalid_argument("run_self_play: one learner per player");
  if (T < 1) throw std::invalid_argument("run_self_play: horizon must be at least 1");

  RunTrace trace;
  trace.players = n;
  trace.T = T;
  trace.strategies.reserve(static_cast<std::size_t>(T));
  trace.gradients.reserve(static_cast<std::size_t>(T));
  trace.lifted.reserve(static_cast<std::size_t>(T));

  std::size_t next_checkpoint = 0;
  for (long t = 1; t <= T; ++t) {
    std::vector<std::vector<double>> profile(static_cast<std::size_t>(n));
    std::vector<LiftedPoint> lifted(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> grads;
    try {
      for (int i = 0; i < n; ++i) {
        profile[static_cast<std::size_t>(i)] =
            learners[static_cast<std::size_t>(i)].next_strategy();
        lifted[static_cast<std::size_t>(i)] =
            learners[static_cast<std::size_t>(i)].current_lifted();
      }
      grads = game.gradients(profile);
      for (int i = 0; i < n; ++i) {
        const auto& u = grads[static_cast<std::size_t>(i)];
        double linf = 0.0;
        for (double v : u) linf = std::max(linf, std::abs(v));
        if (linf > game.gradient_bound + 1e-9)
          trace.violations.push_back("gradient bound exceeded at t=" + std::to_string(t) +
                                     " player " + std::to_string(i));
        // Positivity is an OFTRL-phase invariant; the gradient-ascent
        // fallback may legitimately sit on the boundary.
        if (!learners[static_cast<std::size_t>(i)].adversarial_mode() &&
            !lifted[static_cast<std::size_t>(i)].strictly_positive())
          trace.violations.push_back("lifted iterate not strictly positive at t=" +
                                     std::to_string(t) + " player " + std::to_string(i));
        learners[static_cast<std::size_t>(i)].observe(u);
      }
    } catch (const ProtocolError& e) {
      throw RunAborted(std::string("round ") + std::to_string(t) + ": " + e.what(),
                       std::move(trace));
    } catch (const SolverError& e) {
      throw RunAborted(std::string("round ") + std::to_string(t) + ": " + e.what(),
                       std::move(trace));
    }

    if (t >= 2) {
      std::vector<double> norms(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < n; ++i) {
        const auto prev =
            trace.lifted[static_cast<std::size_t>(t - 2)][static_cast<std::size_t>(i)].as_vector();
        const auto cur = lifted[static_cast<std::size_t>(i)].as_vector();
        std::vector<double> d(cur.size());
        for (std::size_t r = 0; r < d.size(); ++r) d[r] = cur[r] - prev[r];
        norms[static_cast<std::size_t>(i)] = local_norm(prev, d);
        const bool oftrl_phase = !learners[static_cast<std::size_t>(i)].adversarial_mode();
        if (monitors.check_stability && bounds && oftrl_phase &&
            norms[static_cast<std::size_t>(i)] > bounds->stability_bound())
          trace.violations.push_back("stability bound exceeded at t=" + std::to_string(t) +
                                     " player " + std::to_string(i));
        if (monitors.check_stability && bounds && oftrl_phase) {
          // Small local-norm steps cap the l1 strategy move, up to the
          // oracle slack.
          const auto& xa =
              trace.strategies[static_cast<std::size_t>(t - 2)][static_cast<std::size_t>(i)];
          const auto& xb = profile[static_cast<std::size_t>(i)];
          double l1 = 0.0;
          for (std::size_t r = 0; r < xa.size(); ++r) l1 += std::abs(xb[r] - xa[r]);
          const double set_l1 = game.sets[static_cast<std::size_t>(i)].l1;
          if (l1 > 4.0 * set_l1 * norms[static_cast<std::size_t>(i)] +
                       24.0 * set_l1 * bounds->epsilon)
            trace.violations.push_back("l1 move exceeded its local-norm cap at t=" +
                                       std::to_string(t) + " player " + std::to_string(i));
        }
      }
      trace.step_norms.push_back(std::move(norms));
    }

    trace.strategies.push_back(std::move(profile));
    trace.gradients.push_back(std::move(grads));
    trace.lifted.push_back(std::move(lifted));

    if (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == t) {
      CheckpointRow row;
      row.t = t;
      row.path_length = path_length(trace, t);
      for (int i = 0; i < n; ++i) {
        row.external_regret.push_back(external_regret(trace, game, i, t));
        row.lifted_regret.push_back(lifted_regret(trace, game, i, t));
        if (monitors.check_identity &&
            !detail::identity_holds(row.lifted_regret.back(), row.external_regret.back(),
                                    monitors.identity_rtol))
          trace.violations.push_back("regret identity violated at t=" + std::to_string(t) +
                                     " player " + std::to_string(i));
        if (monitors.check_bounds && bounds &&
            row.lifted_regret.back() >
                bounds->regret_bound(t, game.sets[static_cast<std::size_t>(i)].dim))
          trace.violations.push_back("regret bound exceeded at t=" + std::to_string(t) +
                                     " player " + std::to_string(i));
      }
      row.stability_max = stability_report(trace);
      if (monitors.check_bounds && bounds && row.path_length > bounds->path_length_bound(t))
        trace.violations.push_back("path-length bound exceeded at t=" + std::to_string(t));
      trace.checkpoints.push_back(std::move(row));
      ++next_checkpoint;
    }
  }
  return trace;
}

// Least-squares slope of y against log t over the checkpoints; documents the
// "regret grows like log T" summary number.
inline double log_slope(std::span<const long> ts, std::span<const double> ys) {
  if (ts.size() != ys.size() || ts.empty())
    throw std::invalid_argument("log_slope: mismatched samples");
  if (ts.size() == 1) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mx += std::log(static_cast<double>(ts[i]));
    my += ys[i];
  }
  mx /= static_cast<double>(ts.size());
  my /= static_cast<double>(ts.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dx = std::log(static_cast<double>(ts[i])) - mx;
    sxx += dx * dx;
    sxy += dx * (ys[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace lrl

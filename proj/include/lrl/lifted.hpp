#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lrl/treeplex.hpp"
#include "lrl/treeplex_prox.hpp"

namespace lrl {

// A point (lambda, y) of the lifted set {(lambda, y) : lambda in [0,1],
// y in lambda * X}, kept strictly positive by the solvers. The played
// strategy is the normalization y / lambda.
struct LiftedPoint {
  double lam{1.0};
  std::vector<double> y;

  int dim() const { return static_cast<int>(y.size()); }

  std::vector<double> strategy() const {
    std::vector<double> x(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) x[r] = y[r] / lam;
    return x;
  }

  std::vector<double> as_vector() const {
    std::vector<double> z(y.size() + 1);
    z[0] = lam;
    std::copy(y.begin(), y.end(), z.begin() + 1);
    return z;
  }

  static LiftedPoint from_vector(std::span<const double> z) {
    LiftedPoint p;
    p.lam = z[0];
    p.y.assign(z.begin() + 1, z.end());
    return p;
  }

  bool strictly_positive() const {
    if (!(lam > 0.0)) return false;
    for (double v : y)
      if (!(v > 0.0)) return false;
    return true;
  }
};

// Norms induced by the Hessian of the logarithmic regularizer at `center`
// and by its inverse; the pair is dual.
inline double local_norm(std::span<const double> center, std::span<const double> v) {
  if (center.size() != v.size()) throw std::invalid_argument("local_norm: dimension mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const double q = v[r] / center[r];
    s += q * q;
  }
  return std::sqrt(s);
}

inline double local_dual_norm(std::span<const double> center, std::span<const double> v) {
  if (center.size() != v.size())
    throw std::invalid_argument("local_dual_norm: dimension mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const double q = v[r] * center[r];
    s += q * q;
  }
  return std::sqrt(s);
}

// Proximal oracle in local norm for a lifted set: exact solver of
//
//   argmin_{z in lifted X} <gtilde, z> + 1/2 sum_r (z[r]/w[r] - 1)^2
//
// for strictly positive centers w.
struct LiftedProx {
  std::function<std::vector<double>(std::span<const double>, std::span<const double>)> solve;
};

namespace detail {

inline void check_center(std::span<const double> w) {
  for (double v : w)
    if (!(v > 0.0)) throw std::invalid_argument("lifted prox: center must be strictly positive");
}

}  // namespace detail

// Treeplex-backed oracle. `lifted` must be branch(1, [X's treeplex]), so that
// [0,1]*lifted is exactly the lifted set. The quadratic is recentered into
// the -<g, z> + 1/2 sum (z/w)^2 form handled by the scale-derivative
// machinery.
inline LiftedProx make_treeplex_lifted_prox(Treeplex lifted) {
  LiftedProx p;
  p.solve = [tp = std::move(lifted)](std::span<const double> gtilde,
                                     std::span<const double> w) {
    if (static_cast<int>(gtilde.size()) != tp.dim() || static_cast<int>(w.size()) != tp.dim())
      throw std::invalid_argument("lifted prox: dimension mismatch");
    detail::check_center(w);
    std::vector<double> g(gtilde.size());
    for (std::size_t r = 0; r < g.size(); ++r) g[r] = 1.0 / w[r] - gtilde[r];
    return prox_minimize<double>(tp, g, w, 1.0).x;
  };
  return p;
}

// Closed-form oracle for one-dimensional sets X = [lo, hi], whose lifted set
// is the triangle with vertices (0,0), (1,lo), (1,hi). KKT case enumeration:
// the unconstrained stationary point if feasible, else the best point over
// the three edges.
inline LiftedProx make_interval_lifted_prox(double lo, double hi) {
  if (!(lo >= 0.0) || !(hi >= lo))
    throw std::invalid_argument("interval prox: need 0 <= lo <= hi");
  LiftedProx p;
  p.solve = [lo, hi](std::span<const double> gtilde, std::span<const double> w) {
    if (gtilde.size() != 2 || w.size() != 2)
      throw std::invalid_argument("interval prox: expected a 2-dimensional lifted set");
    detail::check_center(w);
    const double g0 = 1.0 / w[0] - gtilde[0];
    const double g1 = 1.0 / w[1] - gtilde[1];
    const double w0sq = w[0] * w[0];
    const double w1sq = w[1] * w[1];

    const auto objective = [&](double z0, double z1) {
      return -g0 * z0 - g1 * z1 + 0.5 * (z0 * z0 / w0sq + z1 * z1 / w1sq);
    };

    double best0 = 0.0, best1 = 0.0;
    double best = objective(0.0, 0.0);
    const auto consider = [&](double z0, double z1) {
      const double v = objective(z0, z1);
      if (v < best) {
        best = v;
        best0 = z0;
        best1 = z1;
      }
    };

    // Unconstrained stationary point.
    {
      const double z0 = g0 * w0sq;
      const double z1 = g1 * w1sq;
      if (z0 >= 0.0 && z0 <= 1.0 && z1 >= lo * z0 && z1 <= hi * z0) consider(z0, z1);
    }
    // Rays through the origin, z = s * (1, c) for c in {lo, hi}.
    for (const double c : {lo, hi}) {
      const double curv = 1.0 / w0sq + c * c / w1sq;
      double s = (g0 + g1 * c) / curv;
      s = std::clamp(s, 0.0, 1.0);
      consider(s, c * s);
    }
    // Top edge z = (1, z1), z1 in [lo, hi].
    {
      const double z1 = std::clamp(g1 * w1sq, lo, hi);
      consider(1.0, z1);
    }
    return std::vector<double>{best0, best1};
  };
  return p;
}

}  // namespace lrl

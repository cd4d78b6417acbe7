#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "lrl/pwl.hpp"
#include "lrl/treeplex.hpp"

namespace lrl {

// Exact minimization of
//
//   V(t) = min_{x in t*Q} { -<g, x> + 1/2 sum_r (x[r] / w[r])^2 }
//
// over a treeplex Q, built on the derivative t -> dV/dt being a strictly
// monotone piecewise-linear function with a standard representation of size
// at most dim(Q). The recursion mirrors the set structure: products add
// their children's derivatives; a branching node eliminates its KKT system
// through per-coordinate fixed-point functions x_k(lambda), sums them, and
// inverts t = sum_k x_k(lambda).

template <class S>
struct ScaleDerivativeTree {
  PwlFn<S> derivative;                      // lambda_Q(t) on [0, +inf)
  std::vector<PwlFn<S>> coordinate_of_dual; // branch nodes: x_k as a function of lambda
  std::vector<ScaleDerivativeTree<S>> children;  // aligned with node children
  int node{-1};
};

namespace detail {

template <class S>
ScaleDerivativeTree<S> build_derivative(const Treeplex& tp, int idx, std::span<const S> g,
                                        std::span<const S> w) {
  const Treeplex::Node& n = tp.node(idx);
  ScaleDerivativeTree<S> out;
  out.node = idx;

  if (n.kind == Treeplex::Kind::product) {
    std::vector<PwlFn<S>> parts;
    parts.reserve(n.children.size());
    out.children.reserve(n.children.size());
    for (int c : n.children) {
      out.children.push_back(build_derivative<S>(tp, c, g, w));
      parts.push_back(out.children.back().derivative);
    }
    out.derivative = sum(std::span<const PwlFn<S>>(parts));
    return out;
  }

  out.children.resize(n.children.size());
  out.coordinate_of_dual.reserve(static_cast<std::size_t>(n.k));
  std::vector<PwlFn<S>> parts;
  parts.reserve(static_cast<std::size_t>(n.k));
  for (int k = 0; k < n.k; ++k) {
    const std::size_t coord = static_cast<std::size_t>(n.offset + k);
    const S w2 = w[coord] * w[coord];
    const int c = n.children[static_cast<std::size_t>(k)];

    // f_k(x) = w^2 (-g_k + lambda_child(x)); constant -w^2 g_k for leaves.
    const S offset = S(0) - w2 * g[coord];
    PwlFn<S> f_k;
    if (c >= 0) {
      out.children[static_cast<std::size_t>(k)] = build_derivative<S>(tp, c, g, w);
      f_k = affine(out.children[static_cast<std::size_t>(k)].derivative, offset, w2);
    } else {
      f_k.intercept = offset;
      f_k.domain.lo = S(0);
    }

    // Stationarity x = [w^2 lambda - f_k(x)]^+ solved by the fixed-point
    // lemma, then recentered from y = w^2 lambda to lambda itself.
    out.coordinate_of_dual.push_back(scale_argument(fixed_point(f_k), w2));
    parts.push_back(out.coordinate_of_dual.back());
  }

  PwlFn<S> total = sum(std::span<const PwlFn<S>>(parts));
  out.derivative = inverse(total);  // lambda as a function of t, extended to t = 0
  return out;
}

template <class S>
void reconstruct_walk(const Treeplex& tp, const ScaleDerivativeTree<S>& tree, const S& t,
                      std::span<S> x) {
  const Treeplex::Node& n = tp.node(tree.node);
  if (n.kind == Treeplex::Kind::product) {
    for (const auto& child : tree.children) reconstruct_walk(tp, child, t, x);
    return;
  }
  const S lam = tree.derivative.value(t);
  for (int k = 0; k < n.k; ++k) {
    const S xk = tree.coordinate_of_dual[static_cast<std::size_t>(k)].value(lam);
    x[static_cast<std::size_t>(n.offset + k)] = xk;
    const int c = n.children[static_cast<std::size_t>(k)];
    if (c >= 0) reconstruct_walk(tp, tree.children[static_cast<std::size_t>(k)], xk, x);
  }
}

template <class S>
void check_prox_inputs(const Treeplex& tp, std::span<const S> g, std::span<const S> w) {
  if (static_cast<int>(g.size()) != tp.dim() || static_cast<int>(w.size()) != tp.dim())
    throw std::invalid_argument("treeplex prox: dimension mismatch");
  for (const S& v : w) {
    if (!(v > S(0)))
      throw std::invalid_argument("treeplex prox: center must be strictly positive");
  }
}

}  // namespace detail

template <class S>
ScaleDerivativeTree<S> build_scale_derivative(const Treeplex& tp, std::span<const S> g,
                                              std::span<const S> w) {
  detail::check_prox_inputs<S>(tp, g, w);
  return detail::build_derivative<S>(tp, tp.root, g, w);
}

// Standard representation of t -> dV/dt on [0, +inf); size at most dim(Q).
template <class S>
PwlFn<S> scale_derivative(const Treeplex& tp, std::span<const S> g, std::span<const S> w) {
  return build_scale_derivative<S>(tp, g, w).derivative;
}

// Unique argmin of the prox objective over t*Q, recovered by walking the
// stationarity functions down the tree.
template <class S>
std::vector<S> prox_point(const ScaleDerivativeTree<S>& tree, const Treeplex& tp, const S& t) {
  if (t < S(0)) throw std::invalid_argument("prox_point: scale must be nonnegative");
  std::vector<S> x(static_cast<std::size_t>(tp.dim()), S(0));
  detail::reconstruct_walk<S>(tp, tree, t, std::span<S>(x));
  return x;
}

template <class S>
std::vector<S> prox_point(const Treeplex& tp, std::span<const S> g, std::span<const S> w,
                          const S& t) {
  const auto tree = build_scale_derivative<S>(tp, g, w);
  return prox_point<S>(tree, tp, t);
}

template <class S>
struct ProxSolution {
  S t{};
  std::vector<S> x;
};

// Minimizes the prox objective over [0, t_max] * Q. The optimal scale is
// t = 0 or t = t_max when the derivative does not change sign; otherwise its
// unique root, located exactly on the piecewise-linear representation.
template <class S>
ProxSolution<S> prox_minimize(const Treeplex& tp, std::span<const S> g, std::span<const S> w,
                              const S& t_max = S(1)) {
  if (!(t_max > S(0))) throw std::invalid_argument("prox_minimize: t_max must be positive");
  const auto tree = build_scale_derivative<S>(tp, g, w);
  const PwlFn<S>& lam = tree.derivative;

  S t;
  if (lam.value(S(0)) >= S(0)) {
    t = S(0);
  } else if (lam.value(t_max) <= S(0)) {
    t = t_max;
  } else {
    const auto c = detail::crossing(lam, S(0));
    if (c.kind != detail::CrossingKind::found)
      throw std::logic_error("prox_minimize: sign change without a root");
    t = c.x;
  }
  return {t, prox_point<S>(tree, tp, t)};
}

// Objective value -<g, x> + 1/2 sum (x/w)^2; shared by callers and tests.
template <class S>
S prox_objective(std::span<const S> g, std::span<const S> w, std::span<const S> x) {
  S v = S(0);
  for (std::size_t r = 0; r < x.size(); ++r) {
    const S q = x[r] / w[r];
    v += -g[r] * x[r] + q * q / S(2);
  }
  return v;
}

}  // namespace lrl

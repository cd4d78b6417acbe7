#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrl {

// Recursive strategy-set structure built from simplexes via Cartesian
// products and branching. A K-simplex is stored as a branching node over K
// empty children. Nodes live in a flat arena; children are arena indices,
// with -1 marking an empty branch child. Each node owns the coordinate slice
// [offset, offset + dim) of the ambient vector: a branching node's K
// branching coordinates come first, followed by the children's slices in
// order.
struct Treeplex {
  enum class Kind { product, branch };

  struct Node {
    Kind kind{Kind::branch};
    int k{0};                    // branching factor (branch nodes)
    std::vector<int> children;   // branch: size k, -1 = empty; product: size >= 1
    int offset{0};
    int dim{0};
  };

  std::vector<Node> nodes;
  int root{0};

  int dim() const { return nodes.empty() ? 0 : nodes[root].dim; }
  const Node& node(int i) const { return nodes[static_cast<std::size_t>(i)]; }
};

namespace detail {

inline int assign_ranges(Treeplex& tp, int idx, int offset) {
  Treeplex::Node& n = tp.nodes[static_cast<std::size_t>(idx)];
  n.offset = offset;
  int end = offset;
  if (n.kind == Treeplex::Kind::branch) {
    end += n.k;
    for (int c : n.children) {
      if (c >= 0) end = assign_ranges(tp, c, end);
    }
  } else {
    for (int c : n.children) end = assign_ranges(tp, c, end);
  }
  n.dim = end - offset;
  return end;
}

// Appends a copy of `src` into `dst`'s arena, returning the new root index.
inline int splice(Treeplex& dst, const Treeplex& src, int idx) {
  const Treeplex::Node& n = src.node(idx);
  std::vector<int> children;
  children.reserve(n.children.size());
  for (int c : n.children) children.push_back(c >= 0 ? splice(dst, src, c) : -1);
  dst.nodes.push_back({n.kind, n.k, std::move(children), 0, 0});
  return static_cast<int>(dst.nodes.size()) - 1;
}

}  // namespace detail

inline Treeplex make_simplex(int k) {
  if (k < 1) throw std::invalid_argument("make_simplex: branching factor must be positive");
  Treeplex tp;
  tp.nodes.push_back({Treeplex::Kind::branch, k, std::vector<int>(static_cast<std::size_t>(k), -1), 0, k});
  tp.root = 0;
  return tp;
}

inline Treeplex make_branch(int k, const std::vector<const Treeplex*>& children) {
  if (k < 1) throw std::invalid_argument("make_branch: branching factor must be positive");
  if (static_cast<int>(children.size()) != k)
    throw std::invalid_argument("make_branch: one child slot per branching coordinate");
  Treeplex tp;
  std::vector<int> idx;
  idx.reserve(children.size());
  for (const Treeplex* c : children)
    idx.push_back(c && !c->nodes.empty() ? detail::splice(tp, *c, c->root) : -1);
  tp.nodes.push_back({Treeplex::Kind::branch, k, std::move(idx), 0, 0});
  tp.root = static_cast<int>(tp.nodes.size()) - 1;
  detail::assign_ranges(tp, tp.root, 0);
  return tp;
}

inline Treeplex make_product(const std::vector<const Treeplex*>& children) {
  if (children.empty()) throw std::invalid_argument("make_product: needs at least one factor");
  if (children.size() == 1) {
    Treeplex tp = *children.front();
    detail::assign_ranges(tp, tp.root, 0);
    return tp;
  }
  Treeplex tp;
  std::vector<int> idx;
  idx.reserve(children.size());
  for (const Treeplex* c : children) {
    if (!c || c->nodes.empty())
      throw std::invalid_argument("make_product: factors must be nonempty");
    idx.push_back(detail::splice(tp, *c, c->root));
  }
  tp.nodes.push_back({Treeplex::Kind::product, 0, std::move(idx), 0, 0});
  tp.root = static_cast<int>(tp.nodes.size()) - 1;
  detail::assign_ranges(tp, tp.root, 0);
  return tp;
}

// The lifted set machinery works on [0,1] * branch(1, [X]); see the solver.
inline Treeplex make_lifted(const Treeplex& inner) {
  return make_branch(1, {&inner});
}

// Structural checks: child bookkeeping consistent, coordinate ranges
// partition [0, dim) in the documented order. Returns human-readable issues.
inline std::vector<std::string> validate_treeplex(const Treeplex& tp) {
  std::vector<std::string> issues;
  if (tp.nodes.empty()) {
    issues.push_back("treeplex has no nodes");
    return issues;
  }
  if (tp.root < 0 || tp.root >= static_cast<int>(tp.nodes.size())) {
    issues.push_back("root index out of range");
    return issues;
  }
  std::vector<bool> seen(tp.nodes.size(), false);

  auto walk = [&](auto&& self, int idx, int expected_offset) -> int {
    if (idx < 0 || idx >= static_cast<int>(tp.nodes.size())) {
      issues.push_back("child index out of range");
      return expected_offset;
    }
    if (seen[static_cast<std::size_t>(idx)]) {
      issues.push_back("node " + std::to_string(idx) + " reached twice");
      return expected_offset;
    }
    seen[static_cast<std::size_t>(idx)] = true;
    const Treeplex::Node& n = tp.node(idx);
    if (n.offset != expected_offset)
      issues.push_back("node " + std::to_string(idx) + " offset " + std::to_string(n.offset) +
                       " overlaps or skips coordinates (expected " +
                       std::to_string(expected_offset) + ")");
    int end = expected_offset;
    if (n.kind == Treeplex::Kind::branch) {
      if (n.k < 1) issues.push_back("node " + std::to_string(idx) + " has branching factor < 1");
      if (static_cast<int>(n.children.size()) != n.k)
        issues.push_back("node " + std::to_string(idx) + " child count mismatch");
      end += n.k;
      for (int c : n.children)
        if (c >= 0) end = self(self, c, end);
    } else {
      if (n.children.empty())
        issues.push_back("product node " + std::to_string(idx) + " has no factors");
      for (int c : n.children) {
        if (c < 0) {
          issues.push_back("product node " + std::to_string(idx) + " has an empty factor");
          continue;
        }
        end = self(self, c, end);
      }
    }
    if (n.dim != end - expected_offset)
      issues.push_back("node " + std::to_string(idx) + " dim " + std::to_string(n.dim) +
                       " does not match its subtree (expected " +
                       std::to_string(end - expected_offset) + ")");
    return end;
  };
  const int total = walk(walk, tp.root, 0);
  if (total != tp.dim())
    issues.push_back("coordinate ranges cover " + std::to_string(total) + " of " +
                     std::to_string(tp.dim()) + " coordinates");
  return issues;
}

namespace detail {

inline double lmo_walk(const Treeplex& tp, int idx, std::span<const double> u,
                       std::vector<double>& x, bool fill) {
  const Treeplex::Node& n = tp.node(idx);
  if (n.kind == Treeplex::Kind::product) {
    double v = 0.0;
    for (int c : n.children) v += lmo_walk(tp, c, u, x, fill);
    return v;
  }
  int best = 0;
  double best_v = 0.0;
  int child_at = n.offset + n.k;
  std::vector<std::pair<int, double>> child_values(static_cast<std::size_t>(n.k), {-1, 0.0});
  for (int k = 0; k < n.k; ++k) {
    double v = u[static_cast<std::size_t>(n.offset + k)];
    const int c = n.children[static_cast<std::size_t>(k)];
    if (c >= 0) {
      child_values[static_cast<std::size_t>(k)] = {c, lmo_walk(tp, c, u, x, false)};
      v += child_values[static_cast<std::size_t>(k)].second;
      child_at += tp.node(c).dim;
    }
    if (k == 0 || v > best_v) {
      best = k;
      best_v = v;  // ties keep the lowest branching index
    }
  }
  if (fill) {
    x[static_cast<std::size_t>(n.offset + best)] = 1.0;
    const int c = n.children[static_cast<std::size_t>(best)];
    if (c >= 0) lmo_walk(tp, c, u, x, true);
  }
  return best_v;
}

}  // namespace detail

// Deterministic linear maximization over the treeplex: ties are broken
// toward the lowest branching index, so the argmax is the lexicographically
// smallest maximizing vertex.
inline std::vector<double> treeplex_lmo(const Treeplex& tp, std::span<const double> u) {
  if (static_cast<int>(u.size()) != tp.dim())
    throw std::invalid_argument("treeplex_lmo: objective dimension mismatch");
  std::vector<double> x(u.size(), 0.0);
  detail::lmo_walk(tp, tp.root, u, x, true);
  return x;
}

inline double treeplex_lmo_value(const Treeplex& tp, std::span<const double> u) {
  if (static_cast<int>(u.size()) != tp.dim())
    throw std::invalid_argument("treeplex_lmo_value: objective dimension mismatch");
  std::vector<double> scratch;
  return detail::lmo_walk(tp, tp.root, u, scratch, false);
}

namespace detail {

inline double residual_walk(const Treeplex& tp, int idx, std::span<const double> x,
                            double scale) {
  const Treeplex::Node& n = tp.node(idx);
  double worst = 0.0;
  if (n.kind == Treeplex::Kind::product) {
    for (int c : n.children) worst = std::max(worst, residual_walk(tp, c, x, scale));
    return worst;
  }
  double s = 0.0;
  for (int k = 0; k < n.k; ++k) {
    const double v = x[static_cast<std::size_t>(n.offset + k)];
    worst = std::max(worst, -v);
    s += v;
  }
  worst = std::max(worst, std::abs(s - scale));
  for (int k = 0; k < n.k; ++k) {
    const int c = n.children[static_cast<std::size_t>(k)];
    if (c >= 0)
      worst = std::max(worst, residual_walk(tp, c, x, x[static_cast<std::size_t>(n.offset + k)]));
  }
  return worst;
}

}  // namespace detail

// Max constraint violation of x against `scale * tp` (nonnegativity and the
// per-node flow conservation).
inline double treeplex_residual(const Treeplex& tp, std::span<const double> x,
                                double scale = 1.0) {
  if (static_cast<int>(x.size()) != tp.dim())
    throw std::invalid_argument("treeplex_residual: point dimension mismatch");
  return detail::residual_walk(tp, tp.root, x, scale);
}

}  // namespace lrl

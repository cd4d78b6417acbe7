#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lrl {

// Scalar policy for the piecewise-linear calculus. Doubles merge nearby
// kinks and refuse near-singular slopes; exact scalar types (the rational
// instantiation used in property tests) specialize with zero tolerances.
template <class S>
struct PwlTraits {
  static S kink_merge_tolerance() { return S(1e-12); }
  static S min_invertible_slope() { return S(1e-14); }
  static S domain_slack() { return S(1e-9); }
};

template <class S>
S pwl_abs(const S& x) {
  return x < S(0) ? S(-x) : x;
}

// Interval with optionally unbounded ends. Ends are closed when present.
template <class S>
struct PwlInterval {
  std::optional<S> lo{};
  std::optional<S> hi{};

  bool contains(const S& x, const S& slack) const {
    if (lo && x < *lo - slack) return false;
    if (hi && x > *hi + slack) return false;
    return true;
  }

  PwlInterval intersect(const PwlInterval& o) const {
    PwlInterval r;
    if (lo && o.lo)
      r.lo = std::max(*lo, *o.lo);
    else
      r.lo = lo ? lo : o.lo;
    if (hi && o.hi)
      r.hi = std::min(*hi, *o.hi);
    else
      r.hi = hi ? hi : o.hi;
    return r;
  }
};

// Slope gained at `at`; the function picks up `slope` extra units of slope
// to the right of the kink.
template <class S>
struct PwlKink {
  S slope{};
  S at{};
};

// Standard representation of a monotone piecewise-linear function,
//
//   f(x) = intercept + base_slope * x + sum_s kinks[s].slope * max(0, x - kinks[s].at),
//
// with kink locations strictly increasing. `clamped` marks functions of the
// form [g]^+ (nonnegative, zero up to a root, then increasing); for those the
// stored pieces already equal the clamped values and evaluation applies an
// outer max(0, .) that is a mathematical no-op.
template <class S>
struct PwlFn {
  S intercept{};
  S base_slope{};
  std::vector<PwlKink<S>> kinks;
  PwlInterval<S> domain{};
  bool clamped{false};

  std::size_t size() const { return kinks.size(); }

  // Value ignoring the domain and the outer clamp.
  S raw_value(const S& x) const {
    S v = intercept + base_slope * x;
    for (const auto& k : kinks) {
      if (x > k.at) v += k.slope * (x - k.at);
    }
    return v;
  }

  S value(const S& x) const {
    if (!domain.contains(x, PwlTraits<S>::domain_slack()))
      throw std::domain_error("PwlFn: argument outside the function domain");
    S v = raw_value(x);
    if (clamped && v < S(0)) v = S(0);
    return v;
  }

  S operator()(const S& x) const { return value(x); }

  // Right slope at x: base slope plus every kink at or left of x.
  S slope_after(const S& x) const {
    S c = base_slope;
    for (const auto& k : kinks) {
      if (k.at <= x) c += k.slope;
    }
    return c;
  }

  bool strictly_increasing(const S& min_slope) const {
    S c = base_slope;
    if (c <= min_slope) return false;
    for (const auto& k : kinks) {
      c += k.slope;
      if (c <= min_slope) return false;
    }
    return true;
  }

  // Sorts kinks, merges locations within tolerance, drops exact zero slopes.
  void normalize() {
    std::sort(kinks.begin(), kinks.end(),
              [](const PwlKink<S>& a, const PwlKink<S>& b) { return a.at < b.at; });
    const S tol = PwlTraits<S>::kink_merge_tolerance();
    std::vector<PwlKink<S>> merged;
    merged.reserve(kinks.size());
    for (auto& k : kinks) {
      if (!merged.empty() && pwl_abs<S>(k.at - merged.back().at) <= tol) {
        merged.back().slope += k.slope;
      } else {
        merged.push_back(std::move(k));
      }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const PwlKink<S>& k) { return k.slope == S(0); }),
                 merged.end());
    kinks = std::move(merged);
  }
};

namespace detail {

// Folds kinks at or left of the lower domain end into the affine part; the
// representation changes off-domain only.
template <class S>
void fold_left(PwlFn<S>& f) {
  if (!f.domain.lo) return;
  const S lo = *f.domain.lo;
  std::vector<PwlKink<S>> kept;
  kept.reserve(f.kinks.size());
  for (auto& k : f.kinks) {
    if (k.at <= lo) {
      f.base_slope += k.slope;
      f.intercept -= k.slope * k.at;
    } else {
      kept.push_back(std::move(k));
    }
  }
  f.kinks = std::move(kept);
}

enum class CrossingKind { below_domain, found, above_domain };

template <class S>
struct Crossing {
  CrossingKind kind;
  S x{};
};

// Largest x with f(x) == level, for nondecreasing f (sup of the level set
// when f is flat at `level`). `below_domain` means f > level everywhere on
// the domain, `above_domain` means f < level everywhere.
template <class S>
Crossing<S> crossing(const PwlFn<S>& f, const S& level) {
  const S min_slope = PwlTraits<S>::min_invertible_slope();

  // Piece anchors: lower domain end (if any) followed by every kink.
  std::vector<S> anchors;
  if (f.domain.lo) anchors.push_back(*f.domain.lo);
  for (const auto& k : f.kinks) {
    if (!f.domain.lo || k.at > *f.domain.lo) anchors.push_back(k.at);
  }

  if (anchors.empty()) {
    // Single affine piece on an unbounded-below domain.
    if (f.base_slope <= min_slope)
      throw std::invalid_argument("PwlFn: flat function has no crossing");
    return {CrossingKind::found, (level - f.intercept) / f.base_slope};
  }

  S v0 = f.raw_value(anchors.front());
  if (v0 >= level) {
    if (f.domain.lo) {
      if (v0 > level) return {CrossingKind::below_domain, S{}};
      // Level attained at the domain start; extend right through any flat run.
      S x = anchors.front();
      for (std::size_t i = 1; i < anchors.size(); ++i) {
        if (f.raw_value(anchors[i]) > level) break;
        x = anchors[i];
      }
      return {CrossingKind::found, x};
    }
    // Unbounded below: walk back down the base piece.
    if (f.base_slope <= min_slope) {
      if (v0 == level) {
        S x = anchors.front();
        for (std::size_t i = 1; i < anchors.size(); ++i) {
          if (f.raw_value(anchors[i]) > level) break;
          x = anchors[i];
        }
        return {CrossingKind::found, x};
      }
      throw std::invalid_argument("PwlFn: flat piece prevents locating crossing");
    }
    return {CrossingKind::found, anchors.front() - (v0 - level) / f.base_slope};
  }

  S prev_x = anchors.front();
  S prev_v = v0;
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const S x = anchors[i];
    const S v = f.raw_value(x);
    if (v >= level) {
      if (v == level) {
        // Flat-at-level runs resolve to their right end.
        S xx = x;
        for (std::size_t j = i + 1; j < anchors.size(); ++j) {
          if (f.raw_value(anchors[j]) > level) break;
          xx = anchors[j];
        }
        return {CrossingKind::found, xx};
      }
      const S slope = (v - prev_v) / (x - prev_x);
      return {CrossingKind::found, prev_x + (level - prev_v) / slope};
    }
    prev_x = x;
    prev_v = v;
  }

  // Past the last anchor.
  const S c = f.slope_after(prev_x);
  if (f.domain.hi) {
    const S vh = f.raw_value(*f.domain.hi);
    if (vh < level) return {CrossingKind::above_domain, S{}};
    if (c <= min_slope) {
      if (prev_v == level) return {CrossingKind::found, *f.domain.hi};
      throw std::invalid_argument("PwlFn: flat tail prevents locating crossing");
    }
    return {CrossingKind::found, prev_x + (level - prev_v) / c};
  }
  if (c <= min_slope)
    throw std::invalid_argument("PwlFn: flat tail prevents locating crossing");
  return {CrossingKind::found, prev_x + (level - prev_v) / c};
}

}  // namespace detail

// offset + scale * f, scale >= 0. Result size equals the input size (scale 0
// collapses to a constant, legal only as an intermediate value).
template <class S>
PwlFn<S> affine(const PwlFn<S>& f, const S& offset, const S& scale) {
  if (scale < S(0))
    throw std::invalid_argument("affine: negative scale would break monotonicity");
  if (f.clamped && offset != S(0) && scale != S(0))
    throw std::invalid_argument("affine: clamped representations only admit pure scaling");
  PwlFn<S> r;
  r.domain = f.domain;
  r.intercept = offset + scale * f.intercept;
  r.base_slope = scale * f.base_slope;
  if (scale != S(0)) {
    r.kinks.reserve(f.kinks.size());
    for (const auto& k : f.kinks) r.kinks.push_back({scale * k.slope, k.at});
    r.clamped = f.clamped;
  }
  return r;
}

// x -> f(c * x) for c > 0.
template <class S>
PwlFn<S> scale_argument(const PwlFn<S>& f, const S& c) {
  if (c <= S(0)) throw std::invalid_argument("scale_argument: factor must be positive");
  PwlFn<S> r;
  r.intercept = f.intercept;
  r.base_slope = f.base_slope * c;
  r.kinks.reserve(f.kinks.size());
  for (const auto& k : f.kinks) r.kinks.push_back({k.slope * c, k.at / c});
  if (f.domain.lo) r.domain.lo = *f.domain.lo / c;
  if (f.domain.hi) r.domain.hi = *f.domain.hi / c;
  r.clamped = f.clamped;
  return r;
}

// Pointwise sum; kink lists are merged and coincident locations coalesced.
// Size is at most the sum of the input sizes.
template <class S>
PwlFn<S> sum(std::span<const PwlFn<S>> fns) {
  if (fns.empty()) throw std::invalid_argument("sum: empty function list");
  PwlFn<S> r;
  r.clamped = true;
  std::size_t total = 0;
  for (const auto& f : fns) total += f.kinks.size();
  r.kinks.reserve(total);
  for (const auto& f : fns) {
    r.intercept += f.intercept;
    r.base_slope += f.base_slope;
    r.kinks.insert(r.kinks.end(), f.kinks.begin(), f.kinks.end());
    r.domain = r.domain.intersect(f.domain);
    r.clamped = r.clamped && f.clamped;
  }
  r.normalize();
  return r;
}

template <class S>
PwlFn<S> sum(const PwlFn<S>& a, const PwlFn<S>& b) {
  const PwlFn<S> fns[] = {a, b};
  return sum(std::span<const PwlFn<S>>(fns, 2));
}

// x -> [f(x) - beta]^+ of a strictly increasing f, in clamped form: the
// pieces left of the root are dropped and a kink is planted at the root.
template <class S>
PwlFn<S> positive_part(const PwlFn<S>& f, const S& beta) {
  if (f.clamped)
    throw std::invalid_argument("positive_part: input must not already be clamped");
  const auto c = detail::crossing(f, beta);
  PwlFn<S> r;
  r.domain = f.domain;
  r.clamped = true;
  switch (c.kind) {
    case detail::CrossingKind::below_domain:
      // f > beta on the whole domain; no clamp region.
      r = f;
      r.intercept -= beta;
      r.clamped = true;
      return r;
    case detail::CrossingKind::above_domain:
      return r;  // identically zero
    case detail::CrossingKind::found:
      break;
  }
  r.kinks.push_back({f.slope_after(c.x), c.x});
  for (const auto& k : f.kinks) {
    if (k.at > c.x) r.kinks.push_back(k);
  }
  r.normalize();
  return r;
}

// Inverse of a strictly increasing function, or the restricted inverse of a
// clamped one (domain closed at the left image end, matching the continuous
// extension used by the scale-derivative recursion).
template <class S>
PwlFn<S> inverse(const PwlFn<S>& f) {
  const S min_slope = PwlTraits<S>::min_invertible_slope();
  PwlFn<S> g = f;
  detail::fold_left(g);

  S x0;     // left end of the invertible part
  S v0;     // f(x0)
  bool closed_left = true;
  bool drop_prefix = false;  // clamped case: kinks in the zero prefix are dropped
  if (g.clamped) {
    drop_prefix = true;
    const auto c = detail::crossing(g, S(0));
    if (c.kind == detail::CrossingKind::above_domain)
      throw std::invalid_argument("inverse: identically zero function");
    if (c.kind == detail::CrossingKind::below_domain) {
      if (!g.domain.lo)
        throw std::invalid_argument("inverse: clamped function with no reachable root");
      x0 = *g.domain.lo;
    } else {
      x0 = c.x;
    }
    v0 = g.raw_value(x0);
    if (v0 < S(0)) v0 = S(0);
  } else {
    if (!g.strictly_increasing(min_slope))
      throw std::invalid_argument("inverse: function is not strictly increasing");
    if (g.domain.lo) {
      x0 = *g.domain.lo;
      v0 = g.raw_value(x0);
    } else {
      x0 = g.kinks.empty() ? S(0) : g.kinks.front().at;
      v0 = g.raw_value(x0);
      closed_left = false;
    }
  }

  S c_prev = drop_prefix ? g.slope_after(x0) : g.base_slope;
  if (c_prev <= min_slope)
    throw std::invalid_argument("inverse: degenerate slope at the start of the range");

  PwlFn<S> r;
  r.base_slope = S(1) / c_prev;
  r.intercept = x0 - v0 * r.base_slope;
  for (const auto& k : g.kinks) {
    if (drop_prefix && k.at <= x0) continue;
    const S c_next = c_prev + k.slope;
    if (c_next <= min_slope)
      throw std::invalid_argument("inverse: degenerate slope inside the range");
    r.kinks.push_back({S(1) / c_next - S(1) / c_prev, g.raw_value(k.at)});
    c_prev = c_next;
  }
  if (closed_left) r.domain.lo = v0;
  if (g.domain.hi) r.domain.hi = g.raw_value(*g.domain.hi);
  r.normalize();
  return r;
}

// For f defined on [0, +inf), the function g mapping y to the unique solution
// of x = [y - f(x)]^+, namely g(y) = [(x + f([x]^+))^{-1}(y)]^+.
template <class S>
PwlFn<S> fixed_point(const PwlFn<S>& f) {
  if (f.clamped) throw std::invalid_argument("fixed_point: input must not be clamped");
  if (!f.domain.lo || *f.domain.lo != S(0) || f.domain.hi)
    throw std::invalid_argument("fixed_point: input domain must be [0, +inf)");
  PwlFn<S> ff = f;
  detail::fold_left(ff);

  PwlFn<S> h;  // x + f([x]^+), defined on the whole line
  h.intercept = ff.intercept;
  h.base_slope = S(1);
  if (ff.base_slope != S(0)) h.kinks.push_back({ff.base_slope, S(0)});
  h.kinks.insert(h.kinks.end(), ff.kinks.begin(), ff.kinks.end());
  h.normalize();

  return positive_part(inverse(h), S(0));
}

}  // namespace lrl

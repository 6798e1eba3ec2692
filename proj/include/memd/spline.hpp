#pragma once

// Envelope interpolation: natural cubic splines solved with the Thomas
// tridiagonal sweep, in whole-record form and as the sliding three-knot
// window the streaming pipeline uses, plus piecewise-linear (sawtooth)
// interpolation as a comparison mode.
//
// Fixed-path evaluation works in the segment-normalized variable
// u = (x - x0)/h with coefficients premultiplied by powers of the integer
// interval width. The integer multiplies are exact, so the Q.24 accumulator
// keeps envelope samples within a couple of LSB of the real path regardless
// of the knot spacing; divisions go through the reciprocal table and
// divisions by 3 through the CSD-encoded 1/3.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "memd/errors.hpp"
#include "memd/paths.hpp"

namespace memd {

template <class P>
struct Knot {
  std::int64_t x;          // sample index, strictly increasing
  typename P::Scalar y;
};

struct TridiagonalSystem {
  std::vector<double> sub;    // length n-1
  std::vector<double> diag;   // length n
  std::vector<double> super;  // length n-1
  std::vector<double> rhs;    // length n
};

// Forward elimination and back substitution; throws SingularSystem when a
// pivot magnitude drops below 1e-12.
std::vector<double> thomas_solve(const TridiagonalSystem& sys);

// Cubic q(x) = a + b(x-x0) + c(x-x0)^2 + d(x-x0)^3 over [x0, x1], with
// d = (c_next - c) / (3h) kept in its numerator form for precision.
template <class P>
struct SplineSegment {
  using Acc = typename P::Acc;

  std::int64_t x0 = 0;
  std::int64_t x1 = 0;
  Acc a{};
  Acc b{};
  Acc c{};
  Acc c_next{};

  std::int64_t width() const noexcept { return x1 - x0; }
  Acc d() const { return P::third((c_next - c) * P::recip_pos_int(width())); }

  Acc eval_acc(std::int64_t x) const;
  typename P::Scalar eval(std::int64_t x) const { return P::narrow(eval_acc(x)); }
};

// Evaluation form of one segment: q(u) = a + u(B + u(C + uD)) over the unit
// ratio u = (x - x0)/h. The integer multiplies by h are exact, so the
// premultiplied coefficients carry no extra rounding over the power basis.
template <class P>
struct SegmentEval {
  using Acc = typename P::Acc;

  std::int64_t x0;
  std::int64_t h;
  Acc a, big_b, big_c, big_d;

  explicit SegmentEval(const SplineSegment<P>& s)
      : x0(s.x0), h(s.width()), a(s.a),
        big_b(P::mul_int(s.b, h)),
        big_c(P::mul_int(P::mul_int(s.c, h), h)),
        big_d(P::third(P::mul_int(P::mul_int(s.c_next - s.c, h), h))) {}

  Acc at(std::int64_t x) const {
    const std::int64_t dx = x - x0;
    if (dx == 0) return a;
    const Acc u = P::unit_ratio(dx, h);
    return a + u * (big_b + u * (big_c + u * big_d));
  }
};

template <class P>
typename P::Acc SplineSegment<P>::eval_acc(std::int64_t x) const {
  return SegmentEval<P>(*this).at(x);
}

namespace detail {

template <class P>
void check_knots(std::span<const Knot<P>> knots, std::size_t minimum) {
  if (knots.size() < minimum) throw TooFewKnots("spline: too few knots");
  for (std::size_t j = 1; j < knots.size(); ++j)
    if (knots[j].x <= knots[j - 1].x)
      throw NonMonotonicKnots("spline: knot abscissae must strictly increase");
}

template <class P>
bool pivot_vanishes(typename P::Acc pivot) {
  if constexpr (P::kIsFixed) {
    return pivot.raw() == 0;
  } else {
    return std::abs(pivot) < 1e-12;
  }
}

}  // namespace detail

// Natural cubic spline: second-derivative parameters from the tridiagonal
// system with free end conditions, then per-segment coefficients.
template <class P>
std::vector<SplineSegment<P>> natural_spline_coeffs(std::span<const Knot<P>> knots) {
  using Acc = typename P::Acc;
  detail::check_knots<P>(knots, 3);
  const std::size_t n = knots.size();
  const std::size_t intervals = n - 1;

  std::vector<std::int64_t> h(intervals);
  std::vector<Acc> slope(intervals);
  for (std::size_t j = 0; j < intervals; ++j) {
    h[j] = knots[j + 1].x - knots[j].x;
    slope[j] = P::div_int(P::widen(knots[j + 1].y) - P::widen(knots[j].y), h[j]);
  }

  // Interior unknowns c_1 .. c_{n-2}; natural conditions pin both ends to 0.
  std::vector<Acc> c(n, P::acc_zero());
  const std::size_t m = n - 2;
  std::vector<Acc> diag(m), rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    diag[i] = P::acc_int(2 * (h[i] + h[i + 1]));
    rhs[i] = P::mul_int(slope[i + 1] - slope[i], 3);
  }
  for (std::size_t i = 1; i < m; ++i) {
    if (detail::pivot_vanishes<P>(diag[i - 1]))
      throw SingularSystem("natural_spline_coeffs: vanishing pivot");
    const Acc w = P::div_pos(P::acc_int(h[i]), diag[i - 1]);
    diag[i] = diag[i] - P::mul_int(w, h[i]);
    rhs[i] = rhs[i] - w * rhs[i - 1];
  }
  if (m > 0) {
    if (detail::pivot_vanishes<P>(diag[m - 1]))
      throw SingularSystem("natural_spline_coeffs: vanishing pivot");
    c[m] = P::div_pos(rhs[m - 1], diag[m - 1]);
    for (std::size_t i = m - 1; i > 0; --i)
      c[i] = P::div_pos(rhs[i - 1] - P::mul_int(c[i + 1], h[i]), diag[i - 1]);
  }

  std::vector<SplineSegment<P>> segments(intervals);
  for (std::size_t j = 0; j < intervals; ++j) {
    SplineSegment<P>& s = segments[j];
    s.x0 = knots[j].x;
    s.x1 = knots[j + 1].x;
    s.a = P::widen(knots[j].y);
    s.b = slope[j] - P::third(P::mul_int(c[j] + c[j] + c[j + 1], h[j]));
    s.c = c[j];
    s.c_next = c[j + 1];
  }
  return segments;
}

// Evaluates the segment whose interval contains x (the final knot belongs to
// the last segment).
template <class P>
typename P::Scalar eval_spline(std::span<const SplineSegment<P>> segments, std::int64_t x) {
  if (segments.empty()) throw TooFewKnots("eval_spline: no segments");
  if (x < segments.front().x0 || x > segments.back().x1)
    throw OutOfRange("eval_spline: query outside the knot range");
  auto it = std::upper_bound(segments.begin(), segments.end(), x,
                             [](std::int64_t q, const SplineSegment<P>& s) { return q < s.x0; });
  const SplineSegment<P>& seg = it == segments.begin() ? *it : *(it - 1);
  return seg.eval(x);
}

// Natural spline over exactly three knots: the streaming envelope primitive.
// Divisions use the reciprocal table; every denominator is an integer knot
// spacing, so lookups are exact within the table domain.
template <class P>
class WindowSpline {
 public:
  using Acc = typename P::Acc;

  WindowSpline(const Knot<P>& k0, const Knot<P>& k1, const Knot<P>& k2) {
    const std::array<Knot<P>, 3> ks{k0, k1, k2};
    detail::check_knots<P>(std::span<const Knot<P>>(ks), 3);
    const std::int64_t h0 = k1.x - k0.x;
    const std::int64_t h1 = k2.x - k1.x;
    const Acc s0 = P::div_int(P::widen(k1.y) - P::widen(k0.y), h0);
    const Acc s1 = P::div_int(P::widen(k2.y) - P::widen(k1.y), h1);
    const Acc c1 = P::div_int(P::mul_int(s1 - s0, 3), 2 * (h0 + h1));

    segments_[0].x0 = k0.x;
    segments_[0].x1 = k1.x;
    segments_[0].a = P::widen(k0.y);
    segments_[0].b = s0 - P::third(P::mul_int(c1, h0));
    segments_[0].c = P::acc_zero();
    segments_[0].c_next = c1;

    segments_[1].x0 = k1.x;
    segments_[1].x1 = k2.x;
    segments_[1].a = P::widen(k1.y);
    segments_[1].b = s1 - P::third(P::mul_int(c1 + c1, h1));
    segments_[1].c = c1;
    segments_[1].c_next = P::acc_zero();
  }

  const SplineSegment<P>& segment(int i) const { return segments_[static_cast<std::size_t>(i)]; }

  Acc eval_acc(std::int64_t x) const {
    return x <= segments_[0].x1 ? segments_[0].eval_acc(x) : segments_[1].eval_acc(x);
  }
  typename P::Scalar eval(std::int64_t x) const { return P::narrow(eval_acc(x)); }

 private:
  std::array<SplineSegment<P>, 2> segments_;
};

// Online mode: spline over three knots evaluated on [from, to), which must
// lie inside [x0, x2]. The caller slides the window one extremum at a time.
template <class P>
std::vector<typename P::Scalar> interpolate_window(const std::array<Knot<P>, 3>& knots,
                                                   std::int64_t from, std::int64_t to) {
  if (from < knots[0].x || to > knots[2].x + 1)
    throw OutOfRange("interpolate_window: query range outside the window");
  WindowSpline<P> w(knots[0], knots[1], knots[2]);
  std::vector<typename P::Scalar> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, to - from)));
  for (std::int64_t x = from; x < to; ++x) out.push_back(w.eval(x));
  return out;
}

template <class P>
std::vector<typename P::Scalar> interpolate_window(const std::array<Knot<P>, 3>& knots) {
  return interpolate_window<P>(knots, knots[0].x, knots[1].x);
}

template <class P>
typename P::Acc linear_eval_acc(const Knot<P>& left, const Knot<P>& right, std::int64_t x) {
  const std::int64_t dx = x - left.x;
  if (dx == 0) return P::widen(left.y);
  const typename P::Acc u = P::unit_ratio(dx, right.x - left.x);
  return P::widen(left.y) + (P::widen(right.y) - P::widen(left.y)) * u;
}

// Piecewise-linear (sawtooth) envelope over the same query convention.
template <class P>
std::vector<typename P::Scalar> linear_interpolate(std::span<const Knot<P>> knots,
                                                   std::int64_t from, std::int64_t to) {
  detail::check_knots<P>(knots, 2);
  if (from < knots.front().x || to > knots.back().x + 1)
    throw OutOfRange("linear_interpolate: query range outside the knots");
  std::vector<typename P::Scalar> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, to - from)));
  std::size_t j = 0;
  for (std::int64_t x = from; x < to; ++x) {
    while (j + 2 < knots.size() && x >= knots[j + 1].x) ++j;
    out.push_back(P::narrow(linear_eval_acc<P>(knots[j], knots[j + 1], x)));
  }
  return out;
}

}  // namespace memd

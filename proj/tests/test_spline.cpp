#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "memd/spline.hpp"

using namespace memd;
using fixed::Fixed;

namespace {

// Oracle: dense Gaussian elimination with partial pivoting over the full
// matrix (band structure only makes it fast, not different).
std::vector<double> dense_solve(const TridiagonalSystem& sys) {
  const std::size_t n = sys.diag.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = sys.diag[i];
    if (i > 0) a[i][i - 1] = sys.sub[i - 1];
    if (i + 1 < n) a[i][i + 1] = sys.super[i];
    a[i][n] = sys.rhs[i];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col] == 0.0) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = a[i][n];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

TridiagonalSystem random_diagonally_dominant(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> off(-2.0, 2.0);
  std::uniform_real_distribution<double> margin(0.5, 3.0);
  TridiagonalSystem sys;
  sys.diag.resize(n);
  sys.rhs.resize(n);
  sys.sub.resize(n - 1);
  sys.super.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sys.sub[i] = off(rng);
    sys.super[i] = off(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double row = (i > 0 ? std::abs(sys.sub[i - 1]) : 0.0) +
                       (i + 1 < n ? std::abs(sys.super[i]) : 0.0);
    sys.diag[i] = (rng() % 2 ? 1.0 : -1.0) * (row + margin(rng));
    sys.rhs[i] = off(rng) * 10.0;
  }
  return sys;
}

template <class P>
std::vector<Knot<P>> make_knots(const std::vector<std::pair<std::int64_t, double>>& pts) {
  std::vector<Knot<P>> knots;
  for (const auto& [x, y] : pts) knots.push_back({x, P::from_real(y)});
  return knots;
}

double acc_real(double v) { return v; }
double acc_real(fixed::Accum v) { return v.to_real(); }

}  // namespace

TEST_CASE("thomas examples") {
  TridiagonalSystem sys{{1, 1}, {2, 2, 2}, {1, 1}, {4, 8, 8}};
  const auto x = thomas_solve(sys);
  REQUIRE(x.size() == 3);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-12));

  TridiagonalSystem identity{{0, 0}, {1, 1, 1}, {0, 0}, {7, -2, 0.5}};
  const auto r = thomas_solve(identity);
  CHECK(r == std::vector<double>{7, -2, 0.5});
}

TEST_CASE("thomas equals dense elimination on 1000 random systems") {
  std::mt19937 rng(41);
  std::uniform_int_distribution<std::size_t> size(3, 512);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto sys = random_diagonally_dominant(rng, size(rng));
    const auto fast = thomas_solve(sys);
    const auto exact = dense_solve(sys);
    for (std::size_t i = 0; i < fast.size(); ++i)
      worst = std::max(worst, std::abs(fast[i] - exact[i]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("singular pivot is detected") {
  TridiagonalSystem sys{{1}, {1, 1}, {1}, {1, 1}};  // second pivot cancels exactly
  CHECK_THROWS_AS(thomas_solve(sys), SingularSystem);
}

TEST_CASE("three-knot natural spline closed form") {
  // knots (0,0),(1,1),(2,0): c1 = -1.5, b0 = 1.5, d0 = -0.5
  const auto knots = make_knots<RealPath>({{0, 0.0}, {1, 1.0}, {2, 0.0}});
  const auto segs = natural_spline_coeffs<RealPath>(knots);
  REQUIRE(segs.size() == 2);
  CHECK(acc_real(segs[0].a) == 0.0);
  CHECK(acc_real(segs[0].b) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(acc_real(segs[0].c) == 0.0);
  CHECK(acc_real(segs[0].c_next) == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(acc_real(segs[0].d()) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(eval_spline<RealPath>(segs, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // same shape stretched by 2 puts the old x = 0.5 at x = 1: value 0.6875
  const auto wide = make_knots<RealPath>({{0, 0.0}, {2, 1.0}, {4, 0.0}});
  const auto wide_segs = natural_spline_coeffs<RealPath>(wide);
  CHECK(eval_spline<RealPath>(wide_segs, 1) == doctest::Approx(0.6875).epsilon(1e-12));
}

TEST_CASE("linear data yields a linear spline") {
  const auto knots = make_knots<RealPath>({{0, 0.0}, {3, 6.0}, {5, 10.0}, {9, 18.0}});
  const auto segs = natural_spline_coeffs<RealPath>(knots);
  for (const auto& s : segs) {
    CHECK(acc_real(s.b) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(acc_real(s.c)) <= 1e-9);
    CHECK(std::abs(acc_real(s.d())) <= 1e-9);
  }
}

TEST_CASE("interpolation, continuity and natural ends on random knot sets") {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> ydist(-100.0, 100.0);
  std::uniform_int_distribution<std::int64_t> gap(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Knot<RealPath>> knots;
    std::int64_t x = 0;
    const int n = 3 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      knots.push_back({x, ydist(rng)});
      x += gap(rng);
    }
    const auto segs = natural_spline_coeffs<RealPath>(knots);

    for (const auto& k : knots)
      CHECK(eval_spline<RealPath>(segs, k.x) == doctest::Approx(k.y).epsilon(1e-9));

    for (std::size_t j = 0; j + 1 < segs.size(); ++j) {
      const double h = static_cast<double>(segs[j].width());
      const double value_left = segs[j].a + segs[j].b * h + segs[j].c * h * h + segs[j].d() * h * h * h;
      const double deriv_left = segs[j].b + 2.0 * segs[j].c * h + 3.0 * segs[j].d() * h * h;
      const double curv_left = 2.0 * segs[j].c + 6.0 * segs[j].d() * h;
      CHECK(std::abs(value_left - segs[j + 1].a) <= 1e-8);
      CHECK(std::abs(deriv_left - segs[j + 1].b) <= 1e-8);
      CHECK(std::abs(curv_left - 2.0 * segs[j + 1].c) <= 1e-8);
    }

    CHECK(std::abs(2.0 * acc_real(segs.front().c)) <= 1e-8);
    const auto& last = segs.back();
    const double h = static_cast<double>(last.width());
    CHECK(std::abs(2.0 * last.c + 6.0 * last.d() * h) <= 1e-8);
  }
}

TEST_CASE("three-knot window online mode") {
  const std::array<Knot<RealPath>, 3> peak{{{0, 0.0}, {1, 1.0}, {2, 0.0}}};
  const auto lead = interpolate_window<RealPath>(peak);
  REQUIRE(lead.size() == 1);
  CHECK(lead[0] == 0.0);

  // stretched copy: interior values match the closed form q(x) = 1.5u - 0.5u^3
  const std::array<Knot<RealPath>, 3> wide{{{0, 0.0}, {4, 1.0}, {8, 0.0}}};
  const auto vals = interpolate_window<RealPath>(wide, 0, 4);
  REQUIRE(vals.size() == 4);
  for (std::int64_t x = 0; x < 4; ++x) {
    const double u = static_cast<double>(x) / 4.0;
    CHECK(vals[static_cast<std::size_t>(x)] ==
          doctest::Approx(1.5 * u - 0.5 * u * u * u).epsilon(1e-12));
  }

  const std::array<Knot<RealPath>, 3> flat{{{0, 3.25}, {5, 3.25}, {9, 3.25}}};
  const auto constant = interpolate_window<RealPath>(flat, 0, 10);
  for (double v : constant) CHECK(v == 3.25);

  CHECK_THROWS_AS(interpolate_window<RealPath>(wide, -1, 4), OutOfRange);
  CHECK_THROWS_AS(interpolate_window<RealPath>(wide, 0, 100), OutOfRange);
}

TEST_CASE("windowed mode vs global spline deviation is reported") {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> ydist(-10.0, 10.0);
  std::vector<Knot<RealPath>> knots;
  for (int i = 0; i < 40; ++i) knots.push_back({i * 7, ydist(rng)});
  const auto global_segs = natural_spline_coeffs<RealPath>(knots);
  double max_dev = 0.0;
  for (std::size_t j = 1; j + 2 < knots.size(); ++j) {
    const WindowSpline<RealPath> w(knots[j], knots[j + 1], knots[j + 2]);
    for (std::int64_t x = knots[j].x; x < knots[j + 1].x; ++x)
      max_dev = std::max(max_dev, std::abs(w.eval(x) - eval_spline<RealPath>(global_segs, x)));
  }
  MESSAGE("windowed vs global natural spline, max deviation: ", max_dev);
  CHECK(max_dev < 20.0);  // sanity only; end-condition locality dominates
}

TEST_CASE("linear interpolation") {
  const auto two = make_knots<RealPath>({{0, 0.0}, {2, 2.0}});
  const auto vals = linear_interpolate<RealPath>(two, 0, 3);
  CHECK(vals[0] == 0.0);
  CHECK(vals[1] == 1.0);
  CHECK(vals[2] == 2.0);

  std::mt19937 rng(53);
  std::uniform_real_distribution<double> ydist(-50.0, 50.0);
  std::vector<Knot<RealPath>> knots;
  std::int64_t x = 0;
  for (int i = 0; i < 12; ++i) {
    knots.push_back({x, ydist(rng)});
    x += 1 + static_cast<std::int64_t>(rng() % 9);
  }
  const auto out = linear_interpolate<RealPath>(knots, 0, knots.back().x + 1);
  std::size_t j = 0;
  for (std::int64_t q = 0; q <= knots.back().x; ++q) {
    while (j + 2 < knots.size() && q >= knots[j + 1].x) ++j;
    const double t = static_cast<double>(q - knots[j].x) /
                     static_cast<double>(knots[j + 1].x - knots[j].x);
    const double expect = knots[j].y + (knots[j + 1].y - knots[j].y) * t;
    CHECK(out[static_cast<std::size_t>(q)] == doctest::Approx(expect).epsilon(1e-12));
  }

  std::vector<Knot<RealPath>> one{{0, 1.0}};
  CHECK_THROWS_AS(linear_interpolate<RealPath>(one, 0, 1), TooFewKnots);
}

TEST_CASE("knot validation") {
  auto bad = make_knots<RealPath>({{0, 0.0}, {0, 1.0}, {2, 0.0}});
  CHECK_THROWS_AS(natural_spline_coeffs<RealPath>(bad), NonMonotonicKnots);
  auto two = make_knots<RealPath>({{0, 0.0}, {1, 1.0}});
  CHECK_THROWS_AS(natural_spline_coeffs<RealPath>(two), TooFewKnots);
  auto segs = natural_spline_coeffs<RealPath>(make_knots<RealPath>({{0, 0.0}, {1, 1.0}, {2, 0.0}}));
  CHECK_THROWS_AS(eval_spline<RealPath>(segs, 3), OutOfRange);
  CHECK_THROWS_AS(eval_spline<RealPath>(segs, -1), OutOfRange);
}

TEST_CASE("fixed path tracks the real path within 4 LSB") {
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> ydist(-500.0, 500.0);
  std::uniform_int_distribution<std::int64_t> gap(1, 200);
  const double lsb = 1.0 / 256.0;

  int queries = 0;
  double worst = 0.0;
  while (queries < 10000) {
    const std::int64_t x1 = gap(rng);
    const std::int64_t x2 = x1 + gap(rng);
    // both paths see the same representable ordinates
    const double y0 = Fixed::from_real(ydist(rng)).to_real();
    const double y1 = Fixed::from_real(ydist(rng)).to_real();
    const double y2 = Fixed::from_real(ydist(rng)).to_real();
    const WindowSpline<RealPath> real_w({0, y0}, {x1, y1}, {x2, y2});
    const WindowSpline<FixedPath> fixed_w({0, Fixed::from_real(y0)},
                                          {x1, Fixed::from_real(y1)},
                                          {x2, Fixed::from_real(y2)});

    for (std::int64_t q = 0; q <= x2 && queries < 10000; ++q, ++queries) {
      const double rv = real_w.eval(q);
      const double fv = fixed_w.eval(q).to_real();
      worst = std::max(worst, std::abs(rv - fv));
    }
  }
  MESSAGE("fixed vs real spline eval, worst deviation in LSB: ", worst / lsb);
  CHECK(worst <= 4.0 * lsb);
}

TEST_CASE("fixed path interpolates knots within 2 LSB") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> ydist(-500.0, 500.0);
  std::uniform_int_distribution<std::int64_t> gap(1, 200);
  const double lsb = 1.0 / 256.0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Knot<FixedPath>> knots;
    std::int64_t x = 0;
    std::vector<double> ys;
    for (int i = 0; i < 6; ++i) {
      const double y = ydist(rng);
      ys.push_back(Fixed::from_real(y).to_real());
      knots.push_back({x, Fixed::from_real(y)});
      x += gap(rng);
    }
    const auto segs = natural_spline_coeffs<FixedPath>(knots);
    for (std::size_t i = 0; i < knots.size(); ++i)
      CHECK(std::abs(eval_spline<FixedPath>(segs, knots[i].x).to_real() - ys[i]) <= 2.0 * lsb);
  }
}

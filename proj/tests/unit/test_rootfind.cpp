#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "imtree/errors.hpp"
#include "imtree/rootfind.hpp"

using namespace imtree;

TEST_CASE("simple roots") {
  auto r = find_rightmost_root([](double m) { return 1.0 - 2.0 * m; }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(r.root - 0.5) <= 1e-9);
  CHECK_FALSE(r.fell_back);

  auto k = find_rightmost_root([](double m) { return std::min(0.4 - m, 2.0 * (0.4 - m)); }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(k.root - 0.4) <= 1e-9);

  auto s = find_rightmost_root([](double m) { return 0.1 - 0.25 * m; }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(s.root - 0.4) <= 1e-9);
}

TEST_CASE("endpoint roots") {
  auto hi = find_rightmost_root([](double m) { return 1.0 - m; }, 0.0, 1.0, 1e-9);
  CHECK(hi.root == 1.0);
  CHECK(hi.evaluations == 1);
  auto lo = find_rightmost_root([](double m) { return -m; }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(lo.root) <= 1e-9);
  // zero on a whole interval: the rightmost zero is wanted
  auto flat = find_rightmost_root([](double m) { return std::min(0.0, 0.6 - m); }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(flat.root - 0.6) <= 1e-9);
}

TEST_CASE("bracket violations") {
  CHECK_THROWS_AS(find_rightmost_root([](double m) { return -1.0 - m; }, 0.0, 1.0, 1e-9), PreconditionError);
  CHECK_THROWS_AS(find_rightmost_root([](double m) { return 2.0 - m; }, 0.0, 1.0, 1e-9), PreconditionError);
  CHECK_THROWS_AS(bisect_rightmost_root([](double m) { return 2.0 - m; }, 0.0, 1.0, 1e-9), PreconditionError);
}

TEST_CASE("convex input falls back to bisection and still finds the root") {
  auto r = find_rightmost_root([](double m) { return std::pow(1.0 - m, 3) - 0.125; }, 0.0, 1.0, 1e-9);
  CHECK(r.fell_back);
  CHECK(std::abs(r.root - 0.5) <= 1e-9);
}

TEST_CASE("random concave piecewise-linear functions") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int fewer = 0;
  const int cases = 500;
  for (int it = 0; it < cases; ++it) {
    const double lo = -5.0 + 10.0 * u(rng), hi = lo + 0.1 + 10.0 * u(rng);
    const double root = lo + (hi - lo) * u(rng);
    const int pieces = 1 + static_cast<int>(u(rng) * 6);
    std::vector<double> slopes;
    for (int i = 0; i < pieces; ++i) slopes.push_back(0.05 + 5.0 * u(rng));
    // lines through (root + shift_i, 0) with shift chosen so that all lines
    // stay >= 0 left of root: f = min_i slope_i * (root_i - mu) with root_i >= root
    std::vector<double> roots{root};
    for (int i = 1; i < pieces; ++i) roots.push_back(root + (hi - lo) * u(rng));
    auto f = [&](double m) {
      double v = INFINITY;
      for (int i = 0; i < pieces; ++i) v = std::min(v, slopes[i] * (roots[i] - m));
      return v;
    };
    const double tol = 1e-9;
    auto a = find_rightmost_root(f, lo, hi, tol);
    auto b = bisect_rightmost_root(f, lo, hi, tol);
    CHECK_FALSE(a.fell_back);
    CHECK(std::abs(a.root - root) <= tol);
    CHECK(std::abs(b.root - root) <= tol);
    CHECK(a.bracket_lo <= root + 1e-12);
    CHECK(a.bracket_hi >= root - 1e-12);
    if (a.evaluations < b.evaluations) ++fewer;
  }
  CHECK(fewer >= cases * 9 / 10);
}

#include "imtree/rootfind.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "imtree/errors.hpp"

namespace imtree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelativeSlack = 1e-9;

// Zero of the line through (x0, f0) and (x1, f1); f0 != f1.
double line_zero(double x0, double f0, double x1, double f1) { return (f1 * x0 - f0 * x1) / (f1 - f0); }

double line_at(double x0, double f0, double x1, double f1, double x) {
  return f0 + (f1 - f0) / (x1 - x0) * (x - x0);
}

double slack(double u, double v) { return kRelativeSlack * std::max({std::abs(u), std::abs(v), 1e-300}); }

RootResult bisect_between(const ScalarFunction& f, double b, double c, double tol, std::size_t evals,
                          bool fell_back) {
  while (c - b > tol) {
    const double mid = 0.5 * (b + c);
    if (mid <= b || mid >= c) break;
    const double fm = f(mid);
    ++evals;
    if (fm >= 0.0) b = mid;
    else c = mid;
  }
  return {0.5 * (b + c), evals, fell_back, b, c};
}

}  // namespace

RootResult bisect_rightmost_root(const ScalarFunction& f, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw PreconditionError("root bracket has lo > hi");
  const double fhi = f(hi);
  if (fhi >= 0.0) {
    if (fhi > 0.0) throw PreconditionError("function is positive at the right end of the bracket");
    return {hi, 1, false, hi, hi};
  }
  const double flo = f(lo);
  if (flo < 0.0) throw PreconditionError("function is negative at the left end of the bracket");
  return bisect_between(f, lo, hi, tol, 2, false);
}

RootResult find_rightmost_root(const ScalarFunction& f, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw PreconditionError("root bracket has lo > hi");
  const double fhi = f(hi);
  if (fhi > 0.0) throw PreconditionError("function is positive at the right end of the bracket");
  if (fhi == 0.0) return {hi, 1, false, hi, hi};
  const double flo = f(lo);
  if (flo < 0.0) throw PreconditionError("function is negative at the left end of the bracket");
  if (hi - lo <= tol) return {0.5 * (lo + hi), 2, false, lo, hi};

  const double third = (hi - lo) / 3.0;
  std::array<double, 4> xs{lo, lo + third, lo + 2.0 * third, hi};
  std::array<double, 4> fs{flo, f(xs[1]), f(xs[2]), fhi};
  std::size_t evals = 4;

  std::size_t k = 0;
  for (std::size_t i = 0; i < 3; ++i)
    if (fs[i] >= 0.0) k = i;

  bool consistent = true;
  for (std::size_t i = 0; i + 1 < 4; ++i)
    if (fs[i + 1] > fs[i] + slack(fs[i], fs[i + 1])) consistent = false;
  for (std::size_t i = 1; i + 1 < 4; ++i)
    if (fs[i] < line_at(xs[i - 1], fs[i - 1], xs[i + 1], fs[i + 1], xs[i]) - slack(fs[i - 1], fs[i + 1]))
      consistent = false;
  if (!consistent) return bisect_between(f, xs[k], xs[k + 1], tol, evals, true);

  double b = xs[k], fb = fs[k], c = xs[k + 1], fc = fs[k + 1];
  bool has_a = k > 0, has_d = k + 2 < 4;
  double a = has_a ? xs[k - 1] : 0.0, fa = has_a ? fs[k - 1] : 0.0;
  double d = has_d ? xs[k + 2] : 0.0, fd = has_d ? fs[k + 2] : 0.0;

  double m = c;
  if (has_a && fa > fb) m = std::min(m, line_zero(a, fa, b, fb));
  if (has_d && fc > fd) m = std::min(m, line_zero(c, fc, d, fd));
  double p = line_zero(b, fb, c, fc);

  while (m - p > tol) {
    const double t = 0.5 * (p + m);
    if (t <= p || t >= m) break;  // bracket below floating-point resolution
    const double ft = f(t);
    ++evals;

    const double eps = slack(fb, fc);
    bool ok = ft <= fb + eps && ft >= fc - eps && ft >= line_at(b, fb, c, fc, t) - eps;
    if (has_a && fa > fb) ok = ok && ft <= line_at(a, fa, b, fb, t) + eps;
    if (has_d && fc > fd) ok = ok && ft <= line_at(c, fc, d, fd, t) + eps;
    if (!ok) {
      if (ft >= 0.0) b = t;
      else c = t;
      return bisect_between(f, b, c, tol, evals, true);
    }

    // A zero to the right of a strictly positive value is the rightmost one.
    if (ft == 0.0 && fb > 0.0) return {t, evals, false, t, t};

    double s = kInf;
    if (ft >= 0.0) {
      a = b, fa = fb, has_a = true;
      b = t, fb = ft;
      if (fa > fb) s = line_zero(a, fa, b, fb);
    } else {
      d = c, fd = fc, has_d = true;
      c = t, fc = ft;
      if (fc > fd) s = line_zero(c, fc, d, fd);
    }
    p = line_zero(b, fb, c, fc);
    m = std::min({m, s, c});
  }
  return {0.5 * (p + m), evals, false, p, m};
}

}  // namespace imtree

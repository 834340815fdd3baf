#pragma once

#include <cstddef>
#include <functional>

namespace imtree {

struct RootResult {
  double root = 0.0;
  std::size_t evaluations = 0;
  /// A concavity or monotonicity violation was seen and the search finished
  /// by plain bisection.
  bool fell_back = false;
  /// Final bracket [p, m] known to contain the rightmost root.
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

using ScalarFunction = std::function<double(double)>;

/// Rightmost root of a concave non-increasing f on [lo, hi] with
/// f(lo) >= 0 >= f(hi). Keeps two points b < c with f(b) >= 0 > f(c) and the
/// points a, d that preceded them. The root lies in [p, m], where p is where
/// the chord b-c meets zero and m the smallest zero of the outer secants a-b
/// and c-d; each step probes the midpoint of [p, m]. The search starts from
/// probes at lo, hi and the two interior thirds. Stops when m - p <= tol or
/// when an exactly zero value is seen to the right of a strictly positive
/// one. Returns the midpoint of the final bracket.
///
/// Throws PreconditionError when f(lo) < 0 or f(hi) > 0.
RootResult find_rightmost_root(const ScalarFunction& f, double lo, double hi, double tol);

/// Reference bisection for the rightmost root under the same preconditions.
/// Counts the two endpoint evaluations.
RootResult bisect_rightmost_root(const ScalarFunction& f, double lo, double hi, double tol);

}  // namespace imtree

#pragma once

// Scalar bracketing helpers on top of Boost.Math TOMS 748.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "oligo_rd/errors.hpp"

namespace oligo_rd::roots {

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

/// Refines a sign-changing bracket to full double precision and returns the
/// endpoint with the smaller residual.
template <class F>
double refine(F&& f, const Bracket& b, std::uintmax_t max_iter = 300) {
  if (b.f_lo == 0.0) return b.lo;
  if (b.f_hi == 0.0) return b.hi;
  if (std::signbit(b.f_lo) == std::signbit(b.f_hi)) {
    throw NoSolutionError("bracket does not change sign");
  }
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 1);
  std::uintmax_t iters = max_iter;
  const auto [a, c] = boost::math::tools::toms748_solve(f, b.lo, b.hi, b.f_lo, b.f_hi, tol, iters);
  const double fa = f(a);
  const double fc = f(c);
  return std::abs(fa) <= std::abs(fc) ? a : c;
}

template <class F>
double refine(F&& f, double lo, double hi) {
  return refine(f, Bracket{lo, hi, f(lo), f(hi)});
}

/// Sign changes of f between consecutive points of a uniform grid with
/// `cells` intervals on [lo, hi]. Non-finite samples split the scan.
template <class F>
std::vector<Bracket> scan(F&& f, double lo, double hi, int cells) {
  std::vector<Bracket> out;
  if (cells < 1 || !(hi > lo)) return out;
  double x_prev = lo;
  double f_prev = f(lo);
  if (f_prev == 0.0) out.push_back({lo, lo, 0.0, 0.0});
  for (int i = 1; i <= cells; ++i) {
    const double x = (i == cells) ? hi : lo + (hi - lo) * static_cast<double>(i) / cells;
    const double fx = f(x);
    if (std::isfinite(fx) && std::isfinite(f_prev)) {
      if (fx == 0.0) {
        out.push_back({x, x, 0.0, 0.0});
      } else if (f_prev != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
        out.push_back({x_prev, x, f_prev, fx});
      }
    }
    x_prev = x;
    f_prev = fx;
  }
  return out;
}

/// Grows hi geometrically from `start` until f changes sign relative to f(lo).
template <class F>
Bracket expand_upward(F&& f, double lo, double start, int max_doublings = 200) {
  double f_lo = f(lo);
  double hi = start;
  for (int i = 0; i < max_doublings; ++i) {
    const double f_hi = f(hi);
    if (f_hi == 0.0 || std::signbit(f_hi) != std::signbit(f_lo)) return {lo, hi, f_lo, f_hi};
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
  }
  throw NoSolutionError("no sign change found while expanding bracket");
}

}  // namespace oligo_rd::roots

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "catsim/error.hpp"

namespace catsim::numkit {

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

/// Golden-section search with parabolic refinement (Brent) on [lo, hi].
///
/// Converges to a local minimum to within `tol` in x. Throws numeric_error when
/// the located point is not lower than both interval ends, i.e. the interval
/// does not bracket an interior minimum.
template <class F>
ScalarMinimum minimize_scalar(F&& f, double lo, double hi, double tol = 1e-10,
                              int max_iterations = 500) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw std::invalid_argument("minimize_scalar: bracket must be finite with lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("minimize_scalar: tol must be positive");

  constexpr double golden = 0.3819660112501051;  // (3 - sqrt 5) / 2
  const double rel = std::sqrt(std::numeric_limits<double>::epsilon());
  int evaluations = 0;
  auto eval = [&](double x) {
    ++evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = eval(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < max_iterations; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = rel * std::abs(x) + tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;

    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= xm) ? a - x : b - x;
      d = golden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    const double fu = eval(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  const double flo = eval(lo);
  const double fhi = eval(hi);
  if (!(fx < flo && fx < fhi))
    throw numeric_error("minimize_scalar: no interior minimum bracketed in [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]; best x=" + std::to_string(x) +
                        " f=" + std::to_string(fx));
  return {x, fx, evaluations};
}

}  // namespace catsim::numkit

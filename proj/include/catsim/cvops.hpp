#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "catsim/conditional.hpp"
#include "catsim/error.hpp"
#include "catsim/hilbert.hpp"
#include "catsim/numkit/minimize.hpp"
#include "catsim/numkit/special.hpp"
#include "catsim/parallel.hpp"

namespace catsim {

// ---------------------------------------------------------------------------
// Even cat states (|alpha> + |-alpha>) / sqrt(K), alpha real.

/// K = 2 (1 + exp(-2 alpha^2))
inline double cat_normalization(double alpha) { return 2.0 * (1.0 + std::exp(-2.0 * alpha * alpha)); }

/// Amplitude of |n> in the even cat; zero for odd n.
inline double cat_amplitude(double alpha, std::size_t n) {
  if (n % 2 == 1) return 0.0;
  const double inv_sqrt_k = 1.0 / std::sqrt(cat_normalization(alpha));
  if (alpha == 0.0) return n == 0 ? 2.0 * inv_sqrt_k : 0.0;
  const double log_mag = -0.5 * alpha * alpha + static_cast<double>(n) * std::log(std::abs(alpha)) -
                         0.5 * numkit::log_factorial(static_cast<std::int64_t>(n));
  return 2.0 * inv_sqrt_k * std::exp(log_mag);
}

inline FockVector cat_state(double alpha, std::size_t n_max) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("cat_state: alpha must be finite");
  std::vector<complex> amps(n_max + 1);
  double norm2 = 0.0;
  for (std::size_t n = 0; n <= n_max; n += 2) {
    amps[n] = cat_amplitude(alpha, n);
    norm2 += std::norm(amps[n]);
  }
  if (norm2 < 1.0 - 1e-12)
    throw std::invalid_argument("cat_state: n_max=" + std::to_string(n_max) +
                                " too small for alpha=" + std::to_string(alpha) +
                                " (captured norm^2 " + std::to_string(norm2) + ")");
  for (auto& a : amps) a /= std::sqrt(norm2);
  return FockVector(std::move(amps));
}

/// <n> of the even cat: alpha^2 tanh(alpha^2).
inline double cat_mean_photons(double alpha) { return alpha * alpha * std::tanh(alpha * alpha); }

/// <cat(alpha)|psi> without materializing the cat; tails beyond psi's cutoff
/// contribute nothing.
inline complex cat_overlap(double alpha, const FockVector& psi) {
  complex acc{};
  for (std::size_t n = 0; n <= psi.n_max(); n += 2) acc += cat_amplitude(alpha, n) * psi[n];
  return acc;
}

// ---------------------------------------------------------------------------
// Gaussian unitaries.

/// R(theta): amplitude n picks up exp(-i n theta).
inline FockVector rotate(const FockVector& psi, double theta) {
  std::vector<complex> out(psi.size());
  for (std::size_t n = 0; n < psi.size(); ++n)
    out[n] = psi[n] * std::polar(1.0, -static_cast<double>(n) * theta);
  return psi.is_normalized() ? FockVector(std::move(out)) : FockVector::unnormalized(std::move(out));
}

namespace detail {

// y = G v with G = (xi/2) (a^2 - a^dag^2), real xi, on a cutoff of v.size().
inline void apply_squeeze_generator(double xi, const std::vector<complex>& v, std::vector<complex>& y) {
  const std::size_t dim = v.size();
  for (std::size_t n = 0; n < dim; ++n) {
    complex acc{};
    if (n + 2 < dim) acc += std::sqrt(static_cast<double>((n + 1) * (n + 2))) * v[n + 2];
    if (n >= 2) acc -= std::sqrt(static_cast<double>(n * (n - 1))) * v[n - 2];
    y[n] = 0.5 * xi * acc;
  }
}

// exp(G) v by s sub-steps of a truncated Taylor series, |G|/s <~ 1.
inline std::vector<complex> expm_squeeze(double xi, std::vector<complex> v) {
  const std::size_t dim = v.size();
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(xi) * static_cast<double>(dim))) + 1;
  const double h = xi / static_cast<double>(steps);
  std::vector<complex> term(dim), next(dim);
  for (std::size_t s = 0; s < steps; ++s) {
    term = v;
    double vnorm = 0.0;
    for (const auto& a : v) vnorm += std::norm(a);
    for (int k = 1; k <= 60; ++k) {
      apply_squeeze_generator(h, term, next);
      double tnorm = 0.0;
      for (std::size_t n = 0; n < dim; ++n) {
        term[n] = next[n] / static_cast<double>(k);
        v[n] += term[n];
        tnorm += std::norm(term[n]);
      }
      if (tnorm <= 1e-36 * vnorm) break;
    }
  }
  return v;
}

}  // namespace detail

/// S(xi) = exp((xi* a^2 - xi a^dag^2) / 2) for real xi.
///
/// The generator is exponentiated on a cutoff of max(n_max, 2 x occupied support + 32),
/// doubled until at most 1e-10 of the weight reaches the top quarter of it, and
/// the result is returned on that cutoff. Throws numeric_error if the cutoff
/// would exceed 2^16.
inline FockVector squeeze(const FockVector& psi, double xi) {
  if (!std::isfinite(xi)) throw std::invalid_argument("squeeze: xi must be finite");
  if (xi == 0.0) return psi;
  constexpr std::size_t kMaxWork = std::size_t{1} << 16;
  double top_fraction = 1.0;
  for (std::size_t work = std::max(psi.size(), 2 * psi.occupied_support() + 32 + 1); work <= kMaxWork; work *= 2) {
    std::vector<complex> v(work);
    for (std::size_t n = 0; n < psi.size(); ++n) v[n] = psi[n];
    v = detail::expm_squeeze(xi, std::move(v));
    double total = 0.0, top = 0.0;
    for (std::size_t n = 0; n < work; ++n) {
      total += std::norm(v[n]);
      if (4 * n >= 3 * work) top += std::norm(v[n]);
    }
    top_fraction = top / total;
    if (top_fraction <= 1e-10)
      return psi.is_normalized() ? FockVector(std::move(v)) : FockVector::unnormalized(std::move(v));
  }
  throw numeric_error("squeeze: no cutoff up to " + std::to_string(kMaxWork) + " contains the state at xi=" +
                      std::to_string(xi) + " (top-quarter weight " + std::to_string(top_fraction) + ")");
}

/// |<a|b>|^2 for normalized inputs.
inline double fidelity(const FockVector& a, const FockVector& b) {
  constexpr double tol = 1e-6;
  if (std::abs(a.norm() - 1.0) > tol || std::abs(b.norm() - 1.0) > tol)
    throw std::invalid_argument("fidelity: inputs must be normalized (norms " + std::to_string(a.norm()) +
                                ", " + std::to_string(b.norm()) + ")");
  complex acc{};
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
  return std::clamp(std::norm(acc), 0.0, 1.0);
}

/// S^dag(xi) R^dag(pi/4) psi_raw. rotation_sign = -1 applies R(pi/4) instead.
inline FockVector prepare_psi_out(const FockVector& psi_raw, double xi, int rotation_sign = +1) {
  if (rotation_sign != 1 && rotation_sign != -1)
    throw std::invalid_argument("prepare_psi_out: rotation_sign must be +1 or -1");
  const auto rotated = rotate(psi_raw, -rotation_sign * std::numbers::pi / 4.0);
  return squeeze(rotated, -xi);
}

// ---------------------------------------------------------------------------
// Closed-form relations for the prepared cat.

/// alpha_prep = e^xi sqrt(2 beta^2 - sinh^2 xi), for xi <= 0.
inline double alpha_prep(double beta, double xi) {
  if (xi > 0.0) throw std::domain_error("alpha_prep: only defined for xi <= 0");
  const double sh = std::sinh(xi);
  const double arg = 2.0 * beta * beta - sh * sh;
  if (arg < 0.0) throw std::domain_error("alpha_prep: 2 beta^2 < sinh^2 xi");
  return std::exp(xi) * std::sqrt(arg);
}

/// Mean photon number after anti-squeezing:
/// 2 beta^2 e^{2 xi} - tanh(2 alpha^2) sinh^2(xi) e^{2 xi}.
inline double mean_photons_after_antisqueeze(double beta, double xi, double alpha) {
  const double e2 = std::exp(2.0 * xi);
  const double sh = std::sinh(xi);
  return 2.0 * beta * beta * e2 - std::tanh(2.0 * alpha * alpha) * sh * sh * e2;
}

/// Closed-form energy of S(xi)(|alpha> + |-alpha>)/sqrt(K) with xi = -r as
/// printed: tanh(2 alpha^2) (alpha^2 e^{2r} + sinh^2 r). Only accurate for
/// bright cats; see squeezed_cat_energy_fock for the direct expectation.
inline double squeezed_cat_energy(double alpha, double r) {
  const double sh = std::sinh(r);
  return std::tanh(2.0 * alpha * alpha) * (alpha * alpha * std::exp(2.0 * r) + sh * sh);
}

/// <n> of squeeze(cat(alpha), -r), evaluated in the Fock basis.
inline double squeezed_cat_energy_fock(double alpha, double r) {
  const double nbar = alpha * alpha * std::exp(2.0 * std::abs(r)) + std::sinh(r) * std::sinh(r);
  const auto n_max = static_cast<std::size_t>(nbar + 12.0 * std::sqrt(nbar + 1.0) * std::exp(std::abs(r)) + 40.0);
  return squeeze(cat_state(alpha, n_max), -r).mean_photons();
}

// ---------------------------------------------------------------------------
// Fidelity maximization against the cat family.

struct CatMatch {
  double xi = 0.0;
  double alpha = 0.0;
  double fidelity = 0.0;
  int rotation_sign = +1;
  double initial_fidelity = 0.0;  // at the fit-law initializer
};

struct CatMatchOptions {
  double xi_half_width = 0.25;
  std::size_t xi_grid = 11;
  double alpha_rel_width = 0.5;
  std::size_t alpha_grid = 41;
  double tolerance = 1e-8;
};

namespace detail {

struct AlphaFit {
  double alpha = 0.0;
  double fidelity = -1.0;
};

// Best cat amplitude for a fixed (normalized) state: coarse grid + Brent.
inline AlphaFit best_alpha(const FockVector& phi, double alpha_hint, const CatMatchOptions& opt) {
  const double lo = std::max(1e-6, alpha_hint * (1.0 - opt.alpha_rel_width));
  const double hi = alpha_hint * (1.0 + opt.alpha_rel_width) + 1e-6;
  auto fid = [&](double a) { return std::norm(cat_overlap(a, phi)); };
  const std::size_t n = std::max<std::size_t>(opt.alpha_grid, 3);
  std::size_t best = 0;
  double best_f = -1.0;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double f = fid(grid[i]);
    if (f > best_f) {
      best_f = f;
      best = i;
    }
  }
  if (best == 0 || best + 1 == n) return {grid[best], best_f};
  try {
    const auto m = numkit::minimize_scalar([&](double a) { return -fid(a); }, grid[best - 1],
                                           grid[best + 1], opt.tolerance);
    return {m.x, -m.fx};
  } catch (const numeric_error&) {
    return {grid[best], best_f};
  }
}

}  // namespace detail

/// Maximizes F(prepare_psi_out(psi_raw, xi), cat(alpha)) over (xi, alpha),
/// starting from the fit laws. Both rotation senses are tried at the
/// initializer and the better one is refined.
inline CatMatch optimize_cat_match(const FockVector& psi_raw, double beta, const CatMatchOptions& opt = {}) {
  if (std::abs(psi_raw.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("optimize_cat_match: psi_raw must be normalized");
  const double xi0 = xi_prep_fit(beta);
  const double alpha0 = alpha_prep(beta, std::min(xi0, 0.0));

  CatMatch result;
  double best_initial = -1.0;
  for (int sign : {+1, -1}) {
    detail::AlphaFit fit;
    try {
      fit = detail::best_alpha(prepare_psi_out(psi_raw, xi0, sign), alpha0, opt);
    } catch (const numeric_error&) {
      continue;
    }
    if (fit.fidelity > best_initial) {
      best_initial = fit.fidelity;
      result.rotation_sign = sign;
    }
  }
  if (best_initial < 0.0)
    throw numeric_error("optimize_cat_match(beta=" + std::to_string(beta) + "): squeeze overflows the cutoff for both rotation senses");
  result.initial_fidelity = best_initial;

  auto outer = [&](double xi) {
    return detail::best_alpha(prepare_psi_out(psi_raw, xi, result.rotation_sign), alpha0, opt);
  };
  const std::size_t n = std::max<std::size_t>(opt.xi_grid, 3);
  std::vector<double> grid(n), values(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = xi0 - opt.xi_half_width + 2.0 * opt.xi_half_width * static_cast<double>(i) / static_cast<double>(n - 1);
    values[i] = outer(grid[i]).fidelity;
  }
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  if (best == 0 || best + 1 == n)
    throw numeric_error("optimize_cat_match(beta=" + std::to_string(beta) +
                        "): best squeeze parameter on the edge of the search window; initial-guess fidelity " +
                        std::to_string(result.initial_fidelity));
  numkit::ScalarMinimum m;
  try {
    m = numkit::minimize_scalar([&](double xi) { return -outer(xi).fidelity; }, grid[best - 1],
                                grid[best + 1], opt.tolerance);
  } catch (const numeric_error& e) {
    throw numeric_error("optimize_cat_match(beta=" + std::to_string(beta) + "): " + e.what() +
                        "; initial-guess fidelity " + std::to_string(result.initial_fidelity));
  }
  const auto final_fit = outer(m.x);
  result.xi = m.x;
  result.alpha = final_fit.alpha;
  result.fidelity = std::clamp(final_fit.fidelity, 0.0, 1.0);
  return result;
}

// ---------------------------------------------------------------------------
// Wigner function, W(x, p) with alpha = (x + i p) / sqrt(2); vacuum W(0,0) = 1/pi.

struct WignerGridSpec {
  double x_min = -5.0, x_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  std::size_t nx = 101, np = 101;

  static WignerGridSpec square(double range, std::size_t points) {
    return {-range, range, -range, range, points, points};
  }
};

struct WignerGrid {
  std::vector<double> xs;
  std::vector<double> ps;
  std::vector<double> values;  // values[ix * ps.size() + ip]

  double at(std::size_t ix, std::size_t ip) const { return values[ix * ps.size() + ip]; }
  double dx() const { return xs.size() > 1 ? xs[1] - xs[0] : 0.0; }
  double dp() const { return ps.size() > 1 ? ps[1] - ps[0] : 0.0; }

  /// Riemann sum of W dx dp.
  double normalization() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * dx() * dp();
  }
  double min_value() const { return *std::min_element(values.begin(), values.end()); }
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// Sum_{m,n} rho_mn W_mn(alpha) for rho = |psi><psi| using the Laguerre-type
// recursion in (m, n). Row 0, exp(-2|A|^2) (2A)^n / sqrt(n!) / pi, is built
// from log magnitudes so large |A| and n do not under- or overflow.
// W = sum_k Re(e^{-ik phi} sum_n (-1)^n rho_{n+k,n} f_n^k(4|a|^2)) / pi, doubled for k > 0,
// with f_n^k(x) = sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^k(x) bounded by 1.
inline double wigner_point(const std::vector<complex>& psi, double x, double p) {
  const std::size_t dim = psi.size();
  const complex a{x / std::numbers::sqrt2, p / std::numbers::sqrt2};
  const double u = 4.0 * std::norm(a);
  const double phi = std::arg(a);
  const double log_u = u > 0.0 ? std::log(u) : -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const auto kd = static_cast<double>(k);
    double log_f0 = -0.5 * u - 0.5 * numkit::log_factorial(static_cast<std::int64_t>(k));
    if (k > 0) log_f0 += 0.5 * kd * log_u;
    if (!(log_f0 > -745.0)) continue;
    double f_prev = 0.0;
    double f = std::exp(log_f0);
    complex acc{};
    for (std::size_t n = 0; n + k < dim; ++n) {
      const auto nd = static_cast<double>(n);
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      acc += sign * f * psi[n + k] * std::conj(psi[n]);
      const double f_next =
          ((2.0 * nd + kd + 1.0 - u) * f - std::sqrt(nd * (nd + kd)) * f_prev) / std::sqrt((nd + 1.0) * (nd + kd + 1.0));
      f_prev = f;
      f = f_next;
    }
    const double term = (std::polar(1.0, -kd * phi) * acc).real();
    total += k == 0 ? term : 2.0 * term;
  }
  return total / std::numbers::pi;
}

}  // namespace detail

inline WignerGrid wigner(const FockVector& psi, const WignerGridSpec& spec, unsigned workers = 1) {
  if (spec.nx < 2 || spec.np < 2 || !(spec.x_max > spec.x_min) || !(spec.p_max > spec.p_min))
    throw std::invalid_argument("wigner: grid needs at least 2x2 points and positive extent");
  const auto trimmed = psi.normalized().resized(psi.occupied_support(1e-30));
  const std::vector<complex> amps(trimmed.amplitudes().begin(), trimmed.amplitudes().end());
  WignerGrid g;
  g.xs = detail::linspace(spec.x_min, spec.x_max, spec.nx);
  g.ps = detail::linspace(spec.p_min, spec.p_max, spec.np);
  g.values.assign(spec.nx * spec.np, 0.0);
  parallel_for(spec.nx, workers, [&](std::size_t ix) {
    for (std::size_t ip = 0; ip < spec.np; ++ip)
      g.values[ix * spec.np + ip] = detail::wigner_point(amps, g.xs[ix], g.ps[ip]);
  });
  return g;
}

/// Throws numeric_error when the grid misses part of the state's support.
inline void check_wigner_normalization(const WignerGrid& g, double tolerance = 2e-3) {
  const double s = g.normalization();
  if (std::abs(s - 1.0) > tolerance)
    throw numeric_error("wigner: grid integrates to " + std::to_string(s) +
                        "; enlarge the range or refine the grid");
}

/// |psi(x)|^2 in the position representation (Hermite functions).
inline double position_density(const FockVector& psi, double x) {
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  complex acc = psi[0] * cur;
  for (std::size_t n = 0; n + 1 < psi.size(); ++n) {
    const double next = std::sqrt(2.0 / static_cast<double>(n + 1)) * x * cur -
                        std::sqrt(static_cast<double>(n) / static_cast<double>(n + 1)) * prev;
    prev = cur;
    cur = next;
    acc += psi[n + 1] * cur;
  }
  return std::norm(acc) / psi.squared_norm();
}

}  // namespace catsim

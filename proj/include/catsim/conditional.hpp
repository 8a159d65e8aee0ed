#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "catsim/dynamics.hpp"
#include "catsim/error.hpp"
#include "catsim/hilbert.hpp"
#include "catsim/numkit/minimize.hpp"
#include "catsim/numkit/tridiagonal.hpp"
#include "catsim/parallel.hpp"

namespace catsim {

/// Constants of the empirical laws for tau_opt(beta), p0(beta) and xi_prep(beta).
struct FitLawConstants {
  double b_t = 1.70, c_t = 1.16, d_t = 0.84;
  double b_p = 2.56, c_p = 1.95, d_p = 1.02;
  double a_r = -0.35, b_r = 0.14, c_r = 0.13, d_r = 2.40;

  static constexpr double valid_beta_min = 2.0;
  static constexpr double valid_beta_max = 100.0;
};

/// The laws are only claimed on beta in [2, 100]; evaluators never clamp.
inline bool in_fit_validity_range(double beta) {
  return beta >= FitLawConstants::valid_beta_min && beta <= FitLawConstants::valid_beta_max;
}

inline double tau_opt_fit(double beta, const FitLawConstants& c = {}) {
  return c.b_t / std::pow(1.0 + c.c_t * beta, c.d_t);
}

inline double p_zero_fit(double beta, const FitLawConstants& c = {}) {
  return c.b_p / std::pow(1.0 + c.c_p * beta, c.d_p);
}

inline double xi_prep_fit(double beta, const FitLawConstants& c = {}) {
  return c.a_r + c.b_r / std::pow(1.0 + c.c_r * beta, c.d_r);
}

/// Heralding amplitudes for the initial state |0>_s (x) |beta>_p.
///
/// Block N = 2m starts with all weight on k = m, and the herald reads k = 0, so
/// only rows 0 and m of each block's eigenvector matrix are needed:
///   psi(2m, tau) = a_m * sum_j chi_0^j chi_m^j exp(-i tau lambda_j).
class HeraldPropagator {
 public:
  explicit HeraldPropagator(double beta, double eps_tail = 1e-12, unsigned workers = 1)
      : beta_(beta) {
    const auto initial = initial_block_state(beta, eps_tail);
    const std::size_t pump_max = initial.max_total() / 2;
    blocks_.resize(pump_max + 1);
    initial_norm2_ = initial.squared_norm();
    parallel_for(pump_max + 1, workers, [&](std::size_t m) {
      const complex a_m = initial.amplitude(2 * m, m);
      Block& b = blocks_[m];
      if (m == 0) {
        b.eigenvalues = {0.0};
        b.weights = {a_m.real()};
        return;
      }
      const std::array<std::size_t, 2> rows{0, m};
      const auto dec = numkit::eigh_tridiagonal_rows(block_matrix(2 * m), rows);
      b.eigenvalues = dec.eigenvalues;
      b.weights.resize(dec.eigenvalues.size());
      for (std::size_t j = 0; j < b.weights.size(); ++j)
        b.weights[j] = a_m.real() * dec.rows(0, j) * dec.rows(1, j);
    });
  }

  double beta() const noexcept { return beta_; }
  std::size_t max_total() const noexcept { return 2 * (blocks_.size() - 1); }

  complex amplitude(std::size_t m, double tau) const {
    const Block& b = blocks_[m];
    complex acc{};
    for (std::size_t j = 0; j < b.weights.size(); ++j)
      acc += b.weights[j] * std::polar(1.0, -tau * b.eigenvalues[j]);
    return acc;
  }

  double p0(double tau) const {
    double acc = 0.0;
    for (std::size_t m = 0; m < blocks_.size(); ++m) acc += std::norm(amplitude(m, tau));
    return acc / initial_norm2_;
  }

  /// Unnormalized signal state conditioned on n_p = 0 (support on even n_s).
  FockVector conditional_state(double tau) const {
    std::vector<complex> psi(max_total() + 1);
    for (std::size_t m = 0; m < blocks_.size(); ++m) psi[2 * m] = amplitude(m, tau);
    return FockVector::unnormalized(std::move(psi));
  }

 private:
  struct Block {
    std::vector<double> eigenvalues;
    std::vector<double> weights;
  };
  double beta_;
  double initial_norm2_ = 1.0;
  std::vector<Block> blocks_;
};

/// p0 along a tau grid.
inline std::vector<std::pair<double, double>> p_zero_curve(double beta, std::span<const double> tau_grid,
                                                           double eps_tail = 1e-12,
                                                           unsigned workers = 1) {
  if (!(beta >= 0.0)) throw std::invalid_argument("p_zero_curve: beta must be >= 0");
  const HeraldPropagator prop(beta, eps_tail, workers);
  std::vector<std::pair<double, double>> out(tau_grid.size());
  parallel_for(tau_grid.size(), workers,
               [&](std::size_t i) { out[i] = {tau_grid[i], prop.p0(tau_grid[i])}; });
  return out;
}

struct HeraldResult {
  double beta = 0.0;
  double tau_opt = 0.0;
  double p0 = 0.0;
  FockVector psi_raw;          // normalized conditional signal state
  bool in_fit_range = false;   // beta within the laws' validity range
};

class TauSearchError : public numeric_error {
 public:
  TauSearchError(const std::string& what, std::vector<std::pair<double, double>> curve)
      : numeric_error(what), curve_(std::move(curve)) {}
  const std::vector<std::pair<double, double>>& curve() const noexcept { return curve_; }

 private:
  std::vector<std::pair<double, double>> curve_;
};

struct TauSearchOptions {
  double eps_tail = 1e-12;
  std::size_t grid_points = 400;
  double window_factor = 2.5;  // window is (0, window_factor * tau_opt_fit(beta)]
  double tolerance = 1e-10;
  unsigned workers = 1;
};

/// Maximizes p0 over the window: coarse grid, then Brent refinement around the
/// best grid point. Returns the normalized heralded state at tau_opt.
inline HeraldResult find_tau_opt(double beta, const TauSearchOptions& opt = {}) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("find_tau_opt: beta must be > 0");
  if (opt.grid_points < 3) throw std::invalid_argument("find_tau_opt: need at least 3 grid points");
  const HeraldPropagator prop(beta, opt.eps_tail, opt.workers);
  const double window = opt.window_factor * tau_opt_fit(beta);
  const std::size_t n = opt.grid_points;

  std::vector<std::pair<double, double>> curve(n);
  parallel_for(n, opt.workers, [&](std::size_t i) {
    const double tau = window * static_cast<double>(i + 1) / static_cast<double>(n);
    curve[i] = {tau, prop.p0(tau)};
  });
  const auto best = static_cast<std::size_t>(
      std::max_element(curve.begin(), curve.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; }) -
      curve.begin());

  const double lo = best == 0 ? 0.0 : curve[best - 1].first;
  const double hi = best + 1 < n ? curve[best + 1].first : window;
  numkit::ScalarMinimum refined;
  try {
    refined = numkit::minimize_scalar([&](double t) { return -prop.p0(t); }, lo, hi, opt.tolerance);
  } catch (const numeric_error& e) {
    throw TauSearchError(std::string("find_tau_opt(beta=") + std::to_string(beta) +
                             "): p0 maximum not bracketed inside the search window: " + e.what(),
                         std::move(curve));
  }

  HeraldResult r;
  r.beta = beta;
  r.tau_opt = refined.x;
  const auto heralded = prop.conditional_state(refined.x);
  r.p0 = prop.p0(refined.x);
  r.psi_raw = heralded.normalized();
  r.in_fit_range = in_fit_validity_range(beta);
  return r;
}

}  // namespace catsim

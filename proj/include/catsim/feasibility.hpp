#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "catsim/conditional.hpp"

namespace catsim::feasibility {

/// Defaults are CODATA 2018 values in SI. Other unit systems pass their own.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;        // J s
  double epsilon0 = 8.8541878128e-12;   // F / m
  double speed_of_light = 299792458.0;  // m / s
};

struct PlatformParams {
  double chi2 = 0.0;          // m / V
  double n_s = 0.0;           // refractive index at the signal wavelength
  double n_p = 0.0;           // refractive index at the pump wavelength
  double wavelength_s = 0.0;  // m
  double mode_volume = 0.0;   // m^3
  double q = 0.0;             // quality factor
  double beta = 0.0;          // pump coherent amplitude

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    if (!(chi2 >= 0.0)) throw std::invalid_argument("chi2 must be non-negative");
    positive(n_s, "n_s");
    positive(n_p, "n_p");
    positive(wavelength_s, "wavelength_s");
    positive(mode_volume, "mode_volume");
    positive(q, "Q");
    positive(beta, "beta");
  }

  double omega_s(const PhysicalConstants& k = {}) const { return 2.0 * std::numbers::pi * k.speed_of_light / wavelength_s; }
  double omega_p(const PhysicalConstants& k = {}) const { return 2.0 * omega_s(k); }
};

/// Congruent lithium niobate near 1.55 um with first-order quasi-phase matching:
/// d_eff = 14 pm/V, chi2 = 2 d_eff, extraordinary indices n(1550) = 2.138,
/// n(775) = 2.179; 1e-15 m^3 mode volume, Q = 1e8.
inline PlatformParams lithium_niobate_reference(double beta = 10.0) {
  return {28e-12, 2.138, 2.179, 1.55e-6, 1e-15, 1e8, beta};
}

/// gamma = chi2 omega_s / (4 sqrt2 n_s^2 n_p) * sqrt(hbar omega_p / (V eps0)), s^-1.
inline double coupling_rate(const PlatformParams& p, const PhysicalConstants& k = {}) {
  p.validate();
  const double prefactor = p.chi2 * p.omega_s(k) / (4.0 * std::numbers::sqrt2 * p.n_s * p.n_s * p.n_p);
  return prefactor * std::sqrt(k.hbar * p.omega_p(k) / (p.mode_volume * k.epsilon0));
}

/// t* = Q / omega_s
inline double relaxation_time(const PlatformParams& p, const PhysicalConstants& k = {}) {
  p.validate();
  return p.q / p.omega_s(k);
}

struct PreparationVerdict {
  double t_opt = 0.0;   // s
  double t_star = 0.0;  // s
  bool feasible = false;
  double margin = 0.0;  // t_star / t_opt
};

/// t_opt = tau_opt_fit(beta) / gamma compared against t_star.
inline PreparationVerdict preparation_time(double beta, double gamma, double t_star) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  PreparationVerdict v;
  v.t_opt = std::isinf(gamma) ? 0.0 : tau_opt_fit(beta) / gamma;
  v.t_star = t_star;
  v.feasible = v.t_opt < t_star;
  v.margin = v.t_opt > 0.0 ? t_star / v.t_opt : std::numeric_limits<double>::infinity();
  return v;
}

inline PreparationVerdict preparation_time(const PlatformParams& p) {
  return preparation_time(p.beta, coupling_rate(p), relaxation_time(p));
}

}  // namespace catsim::feasibility

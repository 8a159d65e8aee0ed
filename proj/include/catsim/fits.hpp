#pragma once

#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "catsim/conditional.hpp"
#include "catsim/csv.hpp"
#include "catsim/cvops.hpp"
#include "catsim/numkit/nls.hpp"
#include "catsim/parallel.hpp"

namespace catsim {

/// Desk-scale beta grid used when no grid is given.
inline std::vector<double> default_sweep_grid() { return {2, 3, 4, 5, 6, 8, 10, 12, 15, 20}; }

struct SweepRecord {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  double beta = nan;
  double tau_opt = nan;
  double p0 = nan;
  double xi_star = nan;
  double alpha_star = nan;
  double fidelity = nan;
  double alpha_prep_formula = nan;  // alpha_prep(beta, xi_star)
  double seconds = nan;
  int rotation_sign = 0;
  std::string error;  // empty when the point succeeded

  bool ok() const { return error.empty(); }
};

struct SweepOptions {
  double eps_tail = 1e-12;
  unsigned workers = 1;
  TauSearchOptions tau;
  CatMatchOptions match;
};

inline SweepRecord sweep_point(double beta, const SweepOptions& opt) {
  SweepRecord rec;
  rec.beta = beta;
  const auto start = std::chrono::steady_clock::now();
  try {
    TauSearchOptions tau_opt = opt.tau;
    tau_opt.eps_tail = opt.eps_tail;
    tau_opt.workers = 1;
    const auto herald = find_tau_opt(beta, tau_opt);
    rec.tau_opt = herald.tau_opt;
    rec.p0 = herald.p0;
    const auto match = optimize_cat_match(herald.psi_raw, beta, opt.match);
    rec.xi_star = match.xi;
    rec.alpha_star = match.alpha;
    rec.fidelity = match.fidelity;
    rec.rotation_sign = match.rotation_sign;
    if (match.xi <= 0.0) rec.alpha_prep_formula = alpha_prep(beta, match.xi);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// One record per beta, in input order. Failures are recorded, not thrown.
inline std::vector<SweepRecord> sweep(std::span<const double> betas, const SweepOptions& opt = {}) {
  std::vector<SweepRecord> out(betas.size());
  parallel_for(betas.size(), opt.workers, [&](std::size_t i) { out[i] = sweep_point(betas[i], opt); });
  return out;
}

namespace detail {

inline numkit::FitModel fit_column(const std::vector<SweepRecord>& records, numkit::FitLaw law,
                                   double SweepRecord::*field, std::vector<double> initial) {
  std::vector<double> x, y;
  for (const auto& r : records) {
    if (!r.ok() || !std::isfinite(r.*field) || !std::isfinite(r.beta)) continue;
    x.push_back(r.beta);
    y.push_back(r.*field);
  }
  try {
    return numkit::nls_fit(law, x, y, std::move(initial));
  } catch (const std::exception& e) {
    std::string msg = std::string("fit ") + numkit::to_string(law) + " failed: " + e.what() + "; data:";
    for (std::size_t i = 0; i < x.size(); ++i) msg += " (" + csv::format(x[i]) + ", " + csv::format(y[i]) + ")";
    throw numeric_error(msg);
  }
}

}  // namespace detail

/// Fits start from the published constants.
inline numkit::FitModel fit_tau_opt(const std::vector<SweepRecord>& records, const FitLawConstants& c = {}) {
  return detail::fit_column(records, numkit::FitLaw::TauOpt, &SweepRecord::tau_opt, {c.b_t, c.c_t, c.d_t});
}

inline numkit::FitModel fit_p_zero(const std::vector<SweepRecord>& records, const FitLawConstants& c = {}) {
  return detail::fit_column(records, numkit::FitLaw::PZero, &SweepRecord::p0, {c.b_p, c.c_p, c.d_p});
}

inline numkit::FitModel fit_xi_prep(const std::vector<SweepRecord>& records, const FitLawConstants& c = {}) {
  return detail::fit_column(records, numkit::FitLaw::XiPrep, &SweepRecord::xi_star,
                            {c.a_r, c.b_r, c.c_r, c.d_r});
}

inline numkit::FitModel fit_law(const std::vector<SweepRecord>& records, numkit::FitLaw law) {
  switch (law) {
    case numkit::FitLaw::TauOpt: return fit_tau_opt(records);
    case numkit::FitLaw::PZero: return fit_p_zero(records);
    case numkit::FitLaw::XiPrep: return fit_xi_prep(records);
  }
  throw std::invalid_argument("unknown fit law");
}

// CSV: beta,tau_opt,p0,xi_star,alpha_star,fidelity,alpha_prep_formula,seconds

inline constexpr const char* kSweepHeader = "beta,tau_opt,p0,xi_star,alpha_star,fidelity,alpha_prep_formula,seconds";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << kSweepHeader << '\n';
  for (const auto& r : records)
    csv::write_row(os, {r.beta, r.tau_opt, r.p0, r.xi_star, r.alpha_star, r.fidelity, r.alpha_prep_formula,
                        r.seconds});
}

inline std::vector<SweepRecord> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("sweep CSV: empty input");
  if (csv::split(line) != csv::split(kSweepHeader))
    throw std::invalid_argument(std::string("sweep CSV: expected header '") + kSweepHeader + "'");
  std::vector<SweepRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 8)
      throw std::invalid_argument("sweep CSV line " + std::to_string(line_no) + ": expected 8 columns");
    std::vector<double> v(8);
    for (std::size_t i = 0; i < 8; ++i) {
      try {
        v[i] = std::stod(cells[i]);
      } catch (const std::exception&) {
        throw std::invalid_argument("sweep CSV line " + std::to_string(line_no) + ": bad number '" + cells[i] + "'");
      }
    }
    SweepRecord r;
    r.beta = v[0];
    r.tau_opt = v[1];
    r.p0 = v[2];
    r.xi_star = v[3];
    r.alpha_star = v[4];
    r.fidelity = v[5];
    r.alpha_prep_formula = v[6];
    r.seconds = v[7];
    if (!std::isfinite(r.tau_opt) || !std::isfinite(r.p0)) r.error = "missing values in input";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace catsim

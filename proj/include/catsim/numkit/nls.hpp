#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "catsim/error.hpp"

namespace catsim::numkit {

/// The three empirical laws fitted against sweep data.
///   TauOpt, PZero:  y = b / (1 + c x)^d           params (b, c, d)
///   XiPrep:         y = a + b / (1 + c x)^d       params (a, b, c, d)
enum class FitLaw { TauOpt, PZero, XiPrep };

inline std::size_t parameter_count(FitLaw law) { return law == FitLaw::XiPrep ? 4 : 3; }

inline const char* to_string(FitLaw law) {
  switch (law) {
    case FitLaw::TauOpt: return "tau";
    case FitLaw::PZero: return "p0";
    case FitLaw::XiPrep: return "xi";
  }
  return "?";
}

inline FitLaw fit_law_from_string(const std::string& s) {
  if (s == "tau") return FitLaw::TauOpt;
  if (s == "p0") return FitLaw::PZero;
  if (s == "xi") return FitLaw::XiPrep;
  throw std::invalid_argument("unknown fit law '" + s + "' (expected tau|p0|xi)");
}

inline double evaluate_law(FitLaw law, std::span<const double> p, double x) {
  if (law == FitLaw::XiPrep) return p[0] + p[1] / std::pow(1.0 + p[2] * x, p[3]);
  return p[0] / std::pow(1.0 + p[1] * x, p[2]);
}

struct FitModel {
  FitLaw law = FitLaw::TauOpt;
  std::vector<double> params;
  double residual_norm = 0.0;  // sqrt of the sum of squared residuals
  double residual_rms = 0.0;
  int iterations = 0;
  bool used_fallback = false;

  double operator()(double x) const { return evaluate_law(law, params, x); }
};

struct NlsOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-14;
  std::uint64_t seed = 0x5eed;  // Nelder-Mead restart perturbations
};

namespace detail {

// Solves the small dense system A x = b in place (partial pivoting).
inline bool solve_small(std::vector<double> a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (a[piv * n + col] == 0.0 || !std::isfinite(a[piv * n + col])) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * b[c];
    b[i] = acc / a[i * n + i];
  }
  return std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); });
}

class LeastSquaresProblem {
 public:
  LeastSquaresProblem(FitLaw law, std::span<const double> x, std::span<const double> y)
      : law_(law), x_(x), y_(y) {}

  std::vector<double> residuals(std::span<const double> p) const {
    std::vector<double> r(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) r[i] = evaluate_law(law_, p, x_[i]) - y_[i];
    return r;
  }

  double cost(std::span<const double> p) const {
    const auto r = residuals(p);
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::isfinite(s) ? 0.5 * s : std::numeric_limits<double>::infinity();
  }

  // Central-difference Jacobian, row-major (points x params).
  std::vector<double> jacobian(std::vector<double> p) const {
    const std::size_t n = x_.size(), k = p.size();
    std::vector<double> jac(n * k);
    for (std::size_t j = 0; j < k; ++j) {
      const double h = 1e-7 * std::max(std::abs(p[j]), 1e-3);
      const double saved = p[j];
      p[j] = saved + h;
      const auto rp = residuals(p);
      p[j] = saved - h;
      const auto rm = residuals(p);
      p[j] = saved;
      for (std::size_t i = 0; i < n; ++i) jac[i * k + j] = (rp[i] - rm[i]) / (2.0 * h);
    }
    return jac;
  }

 private:
  FitLaw law_;
  std::span<const double> x_;
  std::span<const double> y_;
};

struct LmOutcome {
  std::vector<double> params;
  double cost;
  int iterations;
  bool ok;
};

inline LmOutcome levenberg_marquardt(const LeastSquaresProblem& prob, std::vector<double> p,
                                     const NlsOptions& opt) {
  const std::size_t k = p.size();
  double cost = prob.cost(p);
  if (!std::isfinite(cost)) return {p, cost, 0, false};
  double lambda = -1.0;
  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    const auto r = prob.residuals(p);
    const auto jac = prob.jacobian(p);
    if (!std::all_of(jac.begin(), jac.end(), [](double v) { return std::isfinite(v); }))
      return {p, cost, iter, false};
    std::vector<double> jtj(k * k, 0.0), grad(k, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t a = 0; a < k; ++a) {
        grad[a] += jac[i * k + a] * r[i];
        for (std::size_t b = 0; b < k; ++b) jtj[a * k + b] += jac[i * k + a] * jac[i * k + b];
      }
    if (lambda < 0.0) {
      double dmax = 0.0;
      for (std::size_t a = 0; a < k; ++a) dmax = std::max(dmax, jtj[a * k + a]);
      lambda = 1e-3 * std::max(dmax, 1e-300);
    }
    if (cost == 0.0) break;

    bool accepted = false;
    bool converged = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      auto damped = jtj;
      for (std::size_t a = 0; a < k; ++a)
        damped[a * k + a] += lambda * std::max(jtj[a * k + a], 1e-300);
      std::vector<double> step(k);
      for (std::size_t a = 0; a < k; ++a) step[a] = -grad[a];
      if (!solve_small(damped, step)) {
        lambda *= 4.0;
        continue;
      }
      std::vector<double> trial(k);
      double step_norm = 0.0, p_norm = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        trial[a] = p[a] + step[a];
        step_norm += step[a] * step[a];
        p_norm += p[a] * p[a];
      }
      const double trial_cost = prob.cost(trial);
      if (trial_cost <= cost) {
        converged = std::sqrt(step_norm) <= opt.step_tolerance * (std::sqrt(p_norm) + opt.step_tolerance) ||
                    cost - trial_cost <= 1e-15 * cost;
        p = std::move(trial);
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
      } else {
        if (std::sqrt(step_norm) <= opt.step_tolerance * (std::sqrt(p_norm) + opt.step_tolerance)) {
          converged = true;
          break;
        }
        lambda *= 4.0;
      }
    }
    if (converged) break;
    if (!accepted) return {p, cost, iter, false};
  }
  return {p, cost, iter, std::isfinite(cost)};
}

template <class Cost>
LmOutcome nelder_mead(Cost&& cost_fn, std::vector<double> start, const NlsOptions& opt) {
  const std::size_t k = start.size();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  int total_iter = 0;
  std::vector<double> best = start;
  double best_cost = cost_fn(best);

  for (int restart = 0; restart < 4; ++restart) {
    std::vector<std::vector<double>> simplex(k + 1, best);
    for (std::size_t i = 0; i < k; ++i) {
      const double scale = std::max(std::abs(best[i]), 1e-2);
      simplex[i + 1][i] += scale * (0.1 + (restart > 0 ? jitter(rng) : 0.0));
    }
    std::vector<double> values(k + 1);
    for (std::size_t i = 0; i <= k; ++i) values[i] = cost_fn(simplex[i]);

    for (int it = 0; it < 20 * opt.max_iterations; ++it, ++total_iter) {
      std::vector<std::size_t> order(k + 1);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
      const auto lo = order.front(), hi = order.back(), second = order[k - 1];
      if (std::abs(values[hi] - values[lo]) <= 1e-30 + 1e-15 * std::abs(values[lo])) break;

      std::vector<double> centroid(k, 0.0);
      for (std::size_t i = 0; i <= k; ++i)
        if (i != hi)
          for (std::size_t j = 0; j < k; ++j) centroid[j] += simplex[i][j] / static_cast<double>(k);
      auto along = [&](double t) {
        std::vector<double> pt(k);
        for (std::size_t j = 0; j < k; ++j) pt[j] = centroid[j] + t * (simplex[hi][j] - centroid[j]);
        return pt;
      };
      auto reflected = along(-1.0);
      const double fr = cost_fn(reflected);
      if (fr < values[lo]) {
        auto expanded = along(-2.0);
        const double fe = cost_fn(expanded);
        if (fe < fr) { simplex[hi] = expanded; values[hi] = fe; }
        else { simplex[hi] = reflected; values[hi] = fr; }
      } else if (fr < values[second]) {
        simplex[hi] = reflected;
        values[hi] = fr;
      } else {
        auto contracted = along(fr < values[hi] ? -0.5 : 0.5);
        const double fc = cost_fn(contracted);
        if (fc < std::min(fr, values[hi])) {
          simplex[hi] = contracted;
          values[hi] = fc;
        } else {
          for (std::size_t i = 0; i <= k; ++i) {
            if (i == lo) continue;
            for (std::size_t j = 0; j < k; ++j)
              simplex[i][j] = simplex[lo][j] + 0.5 * (simplex[i][j] - simplex[lo][j]);
            values[i] = cost_fn(simplex[i]);
          }
        }
      }
    }
    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    if (*it < best_cost) {
      best_cost = *it;
      best = simplex[idx];
    }
  }
  return {best, best_cost, total_iter, std::isfinite(best_cost)};
}

}  // namespace detail

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of one of the empirical laws,
/// with finite-difference Jacobians. Falls back to Nelder-Mead when the
/// Jacobian is unusable or LM stalls.
inline FitModel nls_fit(FitLaw law, std::span<const double> x, std::span<const double> y,
                        std::vector<double> initial, const NlsOptions& opt = {}) {
  const std::size_t k = parameter_count(law);
  if (initial.size() != k)
    throw std::invalid_argument("nls_fit: expected " + std::to_string(k) + " initial parameters");
  if (x.size() != y.size()) throw std::invalid_argument("nls_fit: x and y lengths differ");
  if (x.size() < 2 * k)
    throw std::invalid_argument("nls_fit: need at least " + std::to_string(2 * k) +
                                " data points, got " + std::to_string(x.size()));

  const detail::LeastSquaresProblem prob(law, x, y);
  auto outcome = detail::levenberg_marquardt(prob, initial, opt);
  bool fallback = false;
  if (!outcome.ok) {
    fallback = true;
    auto start = std::all_of(outcome.params.begin(), outcome.params.end(),
                             [](double v) { return std::isfinite(v); })
                     ? outcome.params
                     : initial;
    outcome = detail::nelder_mead([&](const std::vector<double>& p) { return prob.cost(p); },
                                  start, opt);
  }
  if (!outcome.ok || !std::isfinite(outcome.cost)) {
    std::ostringstream msg;
    msg << "nls_fit(" << to_string(law) << ") diverged; last iterate:";
    for (double v : outcome.params) msg << ' ' << v;
    throw numeric_error(msg.str());
  }
  FitModel model;
  model.law = law;
  model.params = outcome.params;
  model.residual_norm = std::sqrt(2.0 * outcome.cost);
  model.residual_rms = model.residual_norm / std::sqrt(static_cast<double>(x.size()));
  model.iterations = outcome.iterations;
  model.used_fallback = fallback;
  return model;
}

}  // namespace catsim::numkit

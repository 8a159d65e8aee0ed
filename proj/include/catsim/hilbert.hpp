#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catsim/error.hpp"
#include "catsim/numkit/special.hpp"

namespace catsim {

using complex = std::complex<double>;

/// Single-mode state over photon numbers 0..n_max.
///
/// A vector is flagged normalized iff its norm is 1 within 1e-10 at
/// construction; projections produce explicitly unnormalized vectors.
class FockVector {
 public:
  static constexpr double kNormTolerance = 1e-10;

  FockVector() : amps_(1, complex{1.0, 0.0}), normalized_(true) {}

  explicit FockVector(std::vector<complex> amps) : amps_(std::move(amps)) {
    if (amps_.empty()) throw std::invalid_argument("FockVector needs at least one amplitude");
    normalized_ = std::abs(norm() - 1.0) <= kNormTolerance;
  }

  static FockVector unnormalized(std::vector<complex> amps) {
    FockVector v(std::move(amps));
    v.normalized_ = false;
    return v;
  }

  static FockVector basis(std::size_t n, std::size_t n_max) {
    std::vector<complex> a(n_max + 1);
    a.at(n) = 1.0;
    return FockVector(std::move(a));
  }

  std::size_t n_max() const noexcept { return amps_.size() - 1; }
  std::size_t size() const noexcept { return amps_.size(); }
  bool is_normalized() const noexcept { return normalized_; }

  complex operator[](std::size_t n) const { return amps_[n]; }
  /// Zero beyond n_max.
  complex at_or_zero(std::size_t n) const { return n < amps_.size() ? amps_[n] : complex{}; }
  std::span<const complex> amplitudes() const noexcept { return amps_; }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }
  double norm() const { return std::sqrt(squared_norm()); }

  FockVector normalized() const {
    const double nrm = norm();
    if (!(nrm > 0.0)) throw numeric_error("cannot normalize a zero-norm Fock vector");
    std::vector<complex> out(amps_);
    for (auto& a : out) a /= nrm;
    return FockVector(std::move(out));
  }

  std::vector<double> probabilities() const {
    const double total = squared_norm();
    std::vector<double> p(amps_.size());
    for (std::size_t n = 0; n < amps_.size(); ++n) p[n] = std::norm(amps_[n]) / total;
    return p;
  }

  double mean_photons() const {
    double acc = 0.0;
    for (std::size_t n = 0; n < amps_.size(); ++n) acc += static_cast<double>(n) * std::norm(amps_[n]);
    return acc / squared_norm();
  }

  /// Copy truncated or zero-padded to a new cutoff; keeps the flag semantics.
  FockVector resized(std::size_t n_max) const {
    std::vector<complex> out(n_max + 1);
    for (std::size_t n = 0; n <= n_max && n < amps_.size(); ++n) out[n] = amps_[n];
    return normalized_ ? FockVector(std::move(out)) : unnormalized(std::move(out));
  }

  /// Smallest L with sum_{n > L} |a_n|^2 <= tail * squared_norm().
  std::size_t occupied_support(double tail = 1e-28) const {
    const double limit = tail * squared_norm();
    double acc = 0.0;
    for (std::size_t n = amps_.size(); n-- > 0;) {
      acc += std::norm(amps_[n]);
      if (acc > limit) return n;
    }
    return 0;
  }

 private:
  std::vector<complex> amps_;
  bool normalized_ = true;
};

/// Two-mode pure state in the conserved-quanta representation: block N holds
/// amplitudes over k = n_p = 0..N/2 with n_s = N - 2k. Unpopulated blocks are
/// empty and carry zero amplitude.
class BlockState {
 public:
  BlockState() = default;
  BlockState(std::size_t max_total, double beta, double eps_tail)
      : blocks_(max_total + 1), beta_(beta), eps_tail_(eps_tail) {}

  std::size_t max_total() const noexcept { return blocks_.empty() ? 0 : blocks_.size() - 1; }
  double beta() const noexcept { return beta_; }
  double eps_tail() const noexcept { return eps_tail_; }

  static std::size_t block_size(std::size_t total) { return total / 2 + 1; }

  bool populated(std::size_t total) const { return total < blocks_.size() && !blocks_[total].empty(); }

  std::span<const complex> block(std::size_t total) const {
    if (total >= blocks_.size()) return {};
    return blocks_[total];
  }

  /// Allocates block N (zero-filled) on first access.
  std::span<complex> mutable_block(std::size_t total) {
    if (total >= blocks_.size()) throw std::out_of_range("block index beyond max_total");
    auto& b = blocks_[total];
    if (b.empty()) b.assign(block_size(total), complex{});
    return b;
  }

  void set_block(std::size_t total, std::vector<complex> amps) {
    if (total >= blocks_.size()) throw std::out_of_range("block index beyond max_total");
    if (!amps.empty() && amps.size() != block_size(total))
      throw std::invalid_argument("block " + std::to_string(total) + " must have " +
                                  std::to_string(block_size(total)) + " entries");
    blocks_[total] = std::move(amps);
  }

  /// Amplitude of |n_s = N-2k> (x) |n_p = k>.
  complex amplitude(std::size_t total, std::size_t k) const {
    if (!populated(total) || k >= blocks_[total].size()) return {};
    return blocks_[total][k];
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& b : blocks_)
      for (const auto& a : b) s += std::norm(a);
    return s;
  }

  BlockState with_same_shape() const {
    BlockState out(max_total(), beta_, eps_tail_);
    return out;
  }

 private:
  std::vector<std::vector<complex>> blocks_;
  double beta_ = 0.0;
  double eps_tail_ = 0.0;
};

struct OccupationRecord {
  double tau = 0.0;
  double mean_ns = 0.0;
  double mean_np = 0.0;
  double sum_energy = 0.0;  // mean_ns + 2 mean_np
};

/// Coherent state |beta> (beta real, >= 0) truncated at n_max.
inline FockVector coherent_amplitudes(double beta, std::size_t n_max) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("coherent amplitude beta must be finite and >= 0");
  std::vector<complex> amps(n_max + 1);
  if (beta == 0.0) {
    amps[0] = 1.0;
  } else {
    const double half_mean = 0.5 * beta * beta;
    const double log_beta = std::log(beta);
    for (std::size_t n = 0; n <= n_max; ++n) {
      const auto nn = static_cast<std::int64_t>(n);
      amps[n] = std::exp(-half_mean + static_cast<double>(n) * log_beta -
                         0.5 * numkit::log_factorial(nn));
    }
  }
  return FockVector(std::move(amps));
}

/// Total-quanta cutoff N_max = 2 m, with m the smallest pump photon number such
/// that the Poisson(beta^2) tail beyond m is <= eps_tail.
inline std::size_t choose_cutoff(double beta, double eps_tail) {
  if (!(eps_tail > 0.0)) throw std::invalid_argument("eps_tail must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be >= 0");
  if (beta == 0.0) return 0;
  const double mean = beta * beta;
  const auto upper = static_cast<std::size_t>(std::ceil(mean + 40.0 * std::sqrt(mean) + 60.0));
  std::vector<double> pmf(upper + 1);
  for (std::size_t n = 0; n <= upper; ++n)
    pmf[n] = std::exp(numkit::log_poisson_pmf(mean, static_cast<std::int64_t>(n)));
  // tail(m) = sum_{n > m} pmf[n], accumulated from the far end.
  double tail = 0.0;
  std::size_t best = upper;
  for (std::size_t m = upper; m-- > 0;) {
    tail += pmf[m + 1];
    if (tail <= eps_tail) best = m;
    else break;
  }
  return 2 * best;
}

/// Pump in |beta>, signal in vacuum: only even N = 2m populated, with the
/// coherent amplitude of m pump photons at k = m.
inline BlockState initial_block_state(double beta, double eps_tail = 1e-12) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  const std::size_t n_total = choose_cutoff(beta, eps_tail);
  const std::size_t pump_max = n_total / 2;
  const auto pump = coherent_amplitudes(beta, pump_max);
  BlockState s(n_total, beta, eps_tail);
  for (std::size_t m = 0; m <= pump_max; ++m) {
    auto blk = s.mutable_block(2 * m);
    blk[m] = pump[m];
  }
  return s;
}

struct MeanOccupations {
  double mean_ns = 0.0;
  double mean_np = 0.0;
};

inline MeanOccupations mean_occupations(const BlockState& s) {
  double ns = 0.0, np = 0.0, total = 0.0;
  for (std::size_t big_n = 0; big_n <= s.max_total(); ++big_n) {
    const auto blk = s.block(big_n);
    for (std::size_t k = 0; k < blk.size(); ++k) {
      const double w = std::norm(blk[k]);
      ns += static_cast<double>(big_n - 2 * k) * w;
      np += static_cast<double>(k) * w;
      total += w;
    }
  }
  if (!(total > 0.0)) throw numeric_error("mean_occupations: zero-norm state");
  return {ns / total, np / total};
}

/// Photon-number distribution of the signal mode, indexed by n_s = 0..max_total.
inline std::vector<double> signal_distribution(const BlockState& s) {
  std::vector<double> p(s.max_total() + 1, 0.0);
  double total = 0.0;
  for (std::size_t big_n = 0; big_n <= s.max_total(); ++big_n) {
    const auto blk = s.block(big_n);
    for (std::size_t k = 0; k < blk.size(); ++k) {
      const double w = std::norm(blk[k]);
      p[big_n - 2 * k] += w;
      total += w;
    }
  }
  if (!(total > 0.0)) throw numeric_error("signal_distribution: zero-norm state");
  for (auto& v : p) v /= total;
  return p;
}

struct HeraldedSignal {
  FockVector state;  // unnormalized k = 0 slice
  double p0 = 0.0;
  bool defined() const noexcept { return p0 > 0.0; }
};

/// Projects onto n_p = 0: psi(n_s = N) = c_{N, k=0}; p0 = |psi|^2 / |s|^2.
inline HeraldedSignal extract_signal_if_pump_vacuum(const BlockState& s) {
  std::vector<complex> psi(s.max_total() + 1);
  for (std::size_t big_n = 0; big_n <= s.max_total(); ++big_n) psi[big_n] = s.amplitude(big_n, 0);
  const double total = s.squared_norm();
  if (!(total > 0.0)) throw numeric_error("extract_signal_if_pump_vacuum: zero-norm state");
  auto v = FockVector::unnormalized(std::move(psi));
  const double p0 = v.squared_norm() / total;
  return {std::move(v), p0};
}

// JSON documents:
//   FockVector: {"n_max": int, "re": [...], "im": [...]}
//   BlockState: {"beta": x, "eps_tail": x, "blocks": {"N": {"re": [...], "im": [...]}}}

inline nlohmann::json to_json(const FockVector& v) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (const auto& a : v.amplitudes()) {
    re.push_back(a.real());
    im.push_back(a.imag());
  }
  return {{"n_max", v.n_max()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline FockVector fock_vector_from_json(const nlohmann::json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != im.size() || re.empty())
    throw std::invalid_argument("FockVector JSON: 're' and 'im' must be equal-length, non-empty");
  if (j.contains("n_max") && j.at("n_max").get<std::size_t>() + 1 != re.size())
    throw std::invalid_argument("FockVector JSON: n_max inconsistent with amplitude count");
  std::vector<complex> amps(re.size());
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = {re[i].get<double>(), im[i].get<double>()};
  return FockVector(std::move(amps));
}

inline nlohmann::json to_json(const BlockState& s) {
  nlohmann::json blocks = nlohmann::json::object();
  for (std::size_t big_n = 0; big_n <= s.max_total(); ++big_n) {
    if (!s.populated(big_n)) continue;
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (const auto& a : s.block(big_n)) {
      re.push_back(a.real());
      im.push_back(a.imag());
    }
    blocks[std::to_string(big_n)] = {{"re", std::move(re)}, {"im", std::move(im)}};
  }
  return {{"beta", s.beta()}, {"eps_tail", s.eps_tail()}, {"blocks", std::move(blocks)}};
}

inline BlockState block_state_from_json(const nlohmann::json& j) {
  std::map<std::size_t, std::vector<complex>> parsed;
  std::size_t max_total = 0;
  for (const auto& [key, val] : j.at("blocks").items()) {
    const auto big_n = static_cast<std::size_t>(std::stoul(key));
    const auto& re = val.at("re");
    const auto& im = val.at("im");
    if (re.size() != im.size()) throw std::invalid_argument("BlockState JSON: re/im length mismatch");
    std::vector<complex> amps(re.size());
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = {re[i].get<double>(), im[i].get<double>()};
    max_total = std::max(max_total, big_n);
    parsed.emplace(big_n, std::move(amps));
  }
  BlockState s(max_total, j.at("beta").get<double>(), j.at("eps_tail").get<double>());
  for (auto& [big_n, amps] : parsed) s.set_block(big_n, std::move(amps));
  return s;
}

}  // namespace catsim

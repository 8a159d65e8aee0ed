#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "catsim/hilbert.hpp"
#include "catsim/numkit/tridiagonal.hpp"
#include "catsim/parallel.hpp"

namespace catsim {

/// Off-diagonal couplings c_k = sqrt((k+1)(N-2k)(N-2k-1)), k = 0..N/2-1, of
/// the interaction restricted to N = n_s + 2 n_p (units of hbar * gamma).
inline std::vector<double> block_coupling(std::size_t total) {
  const std::size_t half = total / 2;
  std::vector<double> c(half);
  for (std::size_t k = 0; k < half; ++k) {
    const double ns = static_cast<double>(total - 2 * k);
    c[k] = std::sqrt(static_cast<double>(k + 1) * ns * (ns - 1.0));
  }
  return c;
}

inline numkit::TridiagonalSym block_matrix(std::size_t total) {
  auto off = block_coupling(total);
  for (std::size_t k = 0; k < off.size(); ++k)
    if (!(off[k] > 0.0))
      throw numeric_error("block " + std::to_string(total) + " has a vanishing coupling at k=" +
                          std::to_string(k));
  return {std::vector<double>(BlockState::block_size(total), 0.0), std::move(off)};
}

struct BlockSpectrum {
  std::size_t total = 0;
  std::vector<double> eigenvalues;   // lambda^{N j}, ascending
  numkit::RealMatrix eigenvectors;   // (k, j): chi^{N j}_k
};

inline BlockSpectrum block_spectrum(std::size_t total) {
  auto dec = numkit::eigh_tridiagonal(block_matrix(total));
  return {total, std::move(dec.eigenvalues), std::move(dec.eigenvectors)};
}

/// Lazily filled, thread-safe map N -> BlockSpectrum. Entries never change once
/// inserted; concurrent requests for the same N may both compute, but only the
/// first result is kept.
class SpectrumCache {
 public:
  std::shared_ptr<const BlockSpectrum> get(std::size_t total) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = spectra_.find(total); it != spectra_.end()) return it->second;
    }
    auto computed = std::make_shared<const BlockSpectrum>(block_spectrum(total));
    std::lock_guard lock(mutex_);
    return spectra_.emplace(total, std::move(computed)).first->second;
  }

  void prefetch(std::span<const std::size_t> totals, unsigned workers) {
    parallel_for(totals.size(), workers, [&](std::size_t i) { get(totals[i]); });
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return spectra_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::size_t, std::shared_ptr<const BlockSpectrum>> spectra_;
};

/// Initial state expanded in the block eigenbases; produces the state at any
/// tau in O(sum of squared block sizes).
class BlockPropagator {
 public:
  BlockPropagator(const BlockState& s0, SpectrumCache& cache, unsigned workers = 1)
      : max_total_(s0.max_total()), beta_(s0.beta()), eps_tail_(s0.eps_tail()) {
    std::vector<std::size_t> totals;
    for (std::size_t n = 0; n <= s0.max_total(); ++n)
      if (s0.populated(n)) totals.push_back(n);
    cache.prefetch(totals, workers);
    for (auto n : totals) {
      Entry e;
      e.spectrum = cache.get(n);
      const auto c0 = s0.block(n);
      const auto& v = e.spectrum->eigenvectors;
      e.coefficients.assign(c0.size(), complex{});
      for (std::size_t j = 0; j < c0.size(); ++j) {
        complex acc{};
        for (std::size_t k = 0; k < c0.size(); ++k) acc += v(k, j) * c0[k];
        e.coefficients[j] = acc;
      }
      entries_.push_back(std::move(e));
    }
  }

  BlockState state_at(double tau) const {
    BlockState out(max_total_, beta_, eps_tail_);
    for (const auto& e : entries_) {
      const auto& v = e.spectrum->eigenvectors;
      const std::size_t m = e.coefficients.size();
      std::vector<complex> phased(m);
      for (std::size_t j = 0; j < m; ++j)
        phased[j] = std::polar(1.0, -tau * e.spectrum->eigenvalues[j]) * e.coefficients[j];
      std::vector<complex> blk(m);
      for (std::size_t k = 0; k < m; ++k) {
        complex acc{};
        const auto row = v.row(k);
        for (std::size_t j = 0; j < m; ++j) acc += row[j] * phased[j];
        blk[k] = acc;
      }
      out.set_block(e.spectrum->total, std::move(blk));
    }
    return out;
  }

 private:
  struct Entry {
    std::shared_ptr<const BlockSpectrum> spectrum;
    std::vector<complex> coefficients;
  };
  std::size_t max_total_;
  double beta_;
  double eps_tail_;
  std::vector<Entry> entries_;
};

/// Exact propagation exp(-i tau H) per block; unpopulated blocks are skipped.
inline BlockState evolve(const BlockState& s0, double tau, SpectrumCache& cache) {
  if (!std::isfinite(tau)) throw std::invalid_argument("evolve: tau must be finite");
  return BlockPropagator(s0, cache).state_at(tau);
}

/// Mean occupations along a tau grid starting from |0>_s (x) |beta>_p.
inline std::vector<OccupationRecord> energy_series(double beta, std::span<const double> tau_grid,
                                                   double eps_tail = 1e-12,
                                                   unsigned workers = 1) {
  for (double t : tau_grid)
    if (!std::isfinite(t)) throw std::invalid_argument("energy_series: non-finite tau");
  SpectrumCache cache;
  const BlockPropagator prop(initial_block_state(beta, eps_tail), cache, workers);
  std::vector<OccupationRecord> out(tau_grid.size());
  parallel_for(tau_grid.size(), workers, [&](std::size_t i) {
    const auto occ = mean_occupations(prop.state_at(tau_grid[i]));
    out[i] = {tau_grid[i], occ.mean_ns, occ.mean_np, occ.mean_ns + 2.0 * occ.mean_np};
  });
  return out;
}

}  // namespace catsim

#pragma once

// Brute-force two-mode reference on the product Fock grid {|n_s> (x) |n_p>}.
// Deliberately shares no code with the block machinery: its own indexing, its
// own coherent amplitudes, and a dense eigensolver from Eigen.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "catsim/error.hpp"
#include "catsim/hilbert.hpp"

namespace catsim::oracle {

struct DenseTwoModeState {
  std::size_t ns_max = 0;
  std::size_t np_max = 0;
  Eigen::MatrixXcd psi;  // (ns_max + 1) x (np_max + 1)

  DenseTwoModeState(std::size_t ns, std::size_t np)
      : ns_max(ns), np_max(np), psi(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(ns + 1),
                                                            static_cast<Eigen::Index>(np + 1))) {}

  double norm() const { return psi.norm(); }
};

inline Eigen::Index flat_index(std::size_t ns, std::size_t np, std::size_t np_max) {
  return static_cast<Eigen::Index>(ns * (np_max + 1) + np);
}

/// a^2 b^dag + a^dag^2 b over the truncated product basis (units of hbar gamma).
inline Eigen::MatrixXd dense_hamiltonian(std::size_t ns_max, std::size_t np_max) {
  const auto dim = static_cast<Eigen::Index>((ns_max + 1) * (np_max + 1));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t ns = 2; ns <= ns_max; ++ns)
    for (std::size_t np = 0; np < np_max; ++np) {
      // <ns-2, np+1| a^2 b^dag |ns, np>
      const double element = std::sqrt(static_cast<double>(ns) * static_cast<double>(ns - 1) *
                                        static_cast<double>(np + 1));
      const auto from = flat_index(ns, np, np_max);
      const auto to = flat_index(ns - 2, np + 1, np_max);
      h(to, from) = element;
      h(from, to) = element;
    }
  return h;
}

/// Vacuum signal, coherent pump with real amplitude beta, truncated at np_max
/// (not renormalized).
inline DenseTwoModeState dense_initial_state(double beta, std::size_t ns_max, std::size_t np_max) {
  DenseTwoModeState s(ns_max, np_max);
  double log_fact = 0.0;
  for (std::size_t np = 0; np <= np_max; ++np) {
    if (np > 0) log_fact += std::log(static_cast<double>(np));
    double amp = 0.0;
    if (beta == 0.0) amp = np == 0 ? 1.0 : 0.0;
    else amp = std::exp(-0.5 * beta * beta + static_cast<double>(np) * std::log(beta) - 0.5 * log_fact);
    s.psi(0, static_cast<Eigen::Index>(np)) = amp;
  }
  return s;
}

struct DenseEvolution {
  DenseTwoModeState state;
  double boundary_weight = 0.0;  // initial weight in the top decile of either index
};

/// exp(-i tau H) psi0 via dense symmetric eigendecomposition.
///
/// H conserves n_s + 2 n_p, so truncation is exact for a total T whenever every
/// (n_s, n_p) with n_s + 2 n_p = T lies in the box. Weight above 1e-14 outside
/// those totals is rejected. The top-decile weight is reported for reference.
inline DenseEvolution dense_evolve(const DenseTwoModeState& psi0, double tau) {
  const std::size_t ns_max = psi0.ns_max, np_max = psi0.np_max;
  const std::size_t closed_total = std::min(ns_max, 2 * np_max + 1);
  const std::size_t ns_decile = ns_max + 1 - std::max<std::size_t>(1, (ns_max + 1 + 9) / 10);
  const std::size_t np_decile = np_max + 1 - std::max<std::size_t>(1, (np_max + 1 + 9) / 10);
  double leaked = 0.0, top = 0.0;
  for (std::size_t ns = 0; ns <= ns_max; ++ns)
    for (std::size_t np = 0; np <= np_max; ++np) {
      const double w = std::norm(psi0.psi(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(np)));
      if (ns + 2 * np > closed_total) leaked += w;
      if (ns >= ns_decile || np >= np_decile) top += w;
    }
  if (leaked > 1e-14)
    throw numeric_error("dense_evolve: " + std::to_string(leaked) +
                        " of the weight sits on totals cut by the truncation box; result untrustworthy");

  const Eigen::MatrixXd h = dense_hamiltonian(ns_max, np_max);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (eig.info() != Eigen::Success) throw numeric_error("dense_evolve: eigensolver failed");

  const auto dim = h.rows();
  Eigen::VectorXcd flat(dim);
  for (std::size_t ns = 0; ns <= ns_max; ++ns)
    for (std::size_t np = 0; np <= np_max; ++np)
      flat(flat_index(ns, np, np_max)) =
          psi0.psi(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(np));

  const Eigen::MatrixXcd vecs = eig.eigenvectors().cast<std::complex<double>>();
  Eigen::VectorXcd coeff = vecs.adjoint() * flat;
  for (Eigen::Index j = 0; j < dim; ++j) coeff(j) *= std::polar(1.0, -tau * eig.eigenvalues()(j));
  const Eigen::VectorXcd evolved = vecs * coeff;

  DenseEvolution out{DenseTwoModeState(ns_max, np_max), top};
  for (std::size_t ns = 0; ns <= ns_max; ++ns)
    for (std::size_t np = 0; np <= np_max; ++np)
      out.state.psi(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(np)) =
          evolved(flat_index(ns, np, np_max));
  return out;
}

/// <a|b> with the block state's (N, k) mapped to (n_s = N - 2k, n_p = k).
inline std::complex<double> overlap(const DenseTwoModeState& a, const BlockState& b) {
  std::complex<double> acc{};
  for (std::size_t total = 0; total <= b.max_total(); ++total) {
    const auto blk = b.block(total);
    for (std::size_t k = 0; k < blk.size(); ++k) {
      const std::size_t ns = total - 2 * k, np = k;
      if (ns > a.ns_max || np > a.np_max) {
        if (std::norm(blk[k]) > 0.0)
          throw std::invalid_argument("overlap: block state occupies (n_s=" + std::to_string(ns) +
                                      ", n_p=" + std::to_string(np) + ") outside the dense cutoffs");
        continue;
      }
      acc += std::conj(a.psi(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(np))) * blk[k];
    }
  }
  return acc;
}

/// Dense symmetric eigenvalues, ascending. Reference for the tridiagonal solver.
inline std::vector<double> dense_symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw numeric_error("dense eigensolver failed");
  return {eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size()};
}

}  // namespace catsim::oracle

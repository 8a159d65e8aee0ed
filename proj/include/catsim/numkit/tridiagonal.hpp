#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "catsim/error.hpp"
#include "catsim/numkit/matrix.hpp"

namespace catsim::numkit {

/// Real symmetric tridiagonal matrix: `diag` has m entries, `offdiag` m-1.
struct TridiagonalSym {
  std::vector<double> diag;
  std::vector<double> offdiag;

  std::size_t size() const noexcept { return diag.size(); }

  void validate() const {
    if (diag.empty()) throw std::invalid_argument("tridiagonal matrix must have at least one row");
    if (offdiag.size() + 1 != diag.size())
      throw std::invalid_argument("tridiagonal offdiag length must be diag length - 1 (got " +
                                  std::to_string(offdiag.size()) + " vs " +
                                  std::to_string(diag.size()) + ")");
    for (std::size_t i = 0; i < diag.size(); ++i)
      if (!std::isfinite(diag[i]))
        throw std::invalid_argument("non-finite diagonal entry at index " + std::to_string(i));
    for (std::size_t i = 0; i < offdiag.size(); ++i)
      if (!std::isfinite(offdiag[i]))
        throw std::invalid_argument("non-finite off-diagonal entry at index " + std::to_string(i));
  }

  /// y = T x
  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t m = size();
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) {
      double acc = diag[i] * x[i];
      if (i > 0) acc += offdiag[i - 1] * x[i - 1];
      if (i + 1 < m) acc += offdiag[i] * x[i + 1];
      y[i] = acc;
    }
    return y;
  }
};

/// Eigenvalues ascending; column j of `eigenvectors` belongs to eigenvalue j.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  RealMatrix eigenvectors;
};

/// Eigenvalues plus a subset of rows of the eigenvector matrix.
/// `rows(r, j)` is component `row_indices[r]` of eigenvector j.
struct PartialEigenDecomposition {
  std::vector<double> eigenvalues;
  std::vector<std::size_t> row_indices;
  RealMatrix rows;
};

namespace detail {

// Implicit QL with Wilkinson-type shifts. Rotations act on the columns of z,
// so each row of z evolves independently; z may hold any subset of rows of the
// identity and comes back as the same rows of the eigenvector matrix.
inline void implicit_ql(std::vector<double>& d, std::vector<double> e, RealMatrix& z) {
  const int n = static_cast<int>(d.size());
  const int nrows = static_cast<int>(z.rows());
  e.push_back(0.0);  // e[i] couples i and i+1; e[n-1] is a sentinel
  constexpr int max_iterations = 60;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Work on z^T so a rotation of columns i, i+1 touches two contiguous rows.
  const auto stride = static_cast<std::size_t>(nrows);
  std::vector<double> zt(static_cast<std::size_t>(n) * stride);
  for (int k = 0; k < nrows; ++k)
    for (int i = 0; i < n; ++i) zt[static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(k)] = z(static_cast<std::size_t>(k), static_cast<std::size_t>(i));

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iterations)
          throw numeric_error("tridiagonal QL failed to converge for eigenvalue " +
                              std::to_string(l));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          double* zi = zt.data() + static_cast<std::size_t>(i) * stride;
          double* zn = zi + stride;
          for (std::size_t k = 0; k < stride; ++k) {
            const double old = zn[k];
            zn[k] = s * zi[k] + c * old;
            zi[k] = c * zi[k] - s * old;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  for (int k = 0; k < nrows; ++k)
    for (int i = 0; i < n; ++i) z(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) = zt[static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(k)];
}

inline std::vector<std::size_t> ascending_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

inline RealMatrix permute_columns(const RealMatrix& z, const std::vector<std::size_t>& order) {
  RealMatrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t j = 0; j < order.size(); ++j) out(r, j) = z(r, order[j]);
  return out;
}

}  // namespace detail

/// Full eigendecomposition of a symmetric tridiagonal matrix.
inline EigenDecomposition eigh_tridiagonal(const TridiagonalSym& t) {
  t.validate();
  std::vector<double> d = t.diag;
  RealMatrix z = RealMatrix::identity(t.size());
  detail::implicit_ql(d, t.offdiag, z);
  const auto order = detail::ascending_order(d);
  EigenDecomposition out;
  out.eigenvalues.reserve(d.size());
  for (auto j : order) out.eigenvalues.push_back(d[j]);
  out.eigenvectors = detail::permute_columns(z, order);
  return out;
}

/// Eigenvalues and only the requested rows of the eigenvector matrix. Costs
/// O(m^2 * rows) instead of O(m^3) for the full set of vectors.
inline PartialEigenDecomposition eigh_tridiagonal_rows(const TridiagonalSym& t,
                                                       std::span<const std::size_t> rows) {
  t.validate();
  const std::size_t m = t.size();
  RealMatrix z(rows.size(), m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m) throw std::invalid_argument("requested eigenvector row out of range");
    z(r, rows[r]) = 1.0;
  }
  std::vector<double> d = t.diag;
  detail::implicit_ql(d, t.offdiag, z);
  const auto order = detail::ascending_order(d);
  PartialEigenDecomposition out;
  for (auto j : order) out.eigenvalues.push_back(d[j]);
  out.row_indices.assign(rows.begin(), rows.end());
  out.rows = detail::permute_columns(z, order);
  return out;
}

}  // namespace catsim::numkit

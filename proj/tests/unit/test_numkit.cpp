#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "catsim/dynamics.hpp"
#include "catsim/numkit/minimize.hpp"
#include "catsim/numkit/nls.hpp"
#include "catsim/numkit/special.hpp"
#include "catsim/numkit/tridiagonal.hpp"

using catsim::numkit::TridiagonalSym;

namespace {

TridiagonalSym random_tridiagonal(std::size_t m, std::mt19937_64& rng, bool zero_diag) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TridiagonalSym t;
  t.diag.resize(m);
  t.offdiag.resize(m - 1);
  for (auto& d : t.diag) d = zero_diag ? 0.0 : u(rng);
  for (auto& e : t.offdiag) e = u(rng);
  return t;
}

double max_abs(const TridiagonalSym& t) {
  double s = 0.0;
  for (double d : t.diag) s = std::max(s, std::abs(d));
  for (double e : t.offdiag) s = std::max(s, std::abs(e));
  return s;
}

void expect_orthonormal_eigenpairs(const TridiagonalSym& t, double tol) {
  const auto dec = catsim::numkit::eigh_tridiagonal(t);
  const std::size_t m = t.size();
  const double scale = std::max(1.0, max_abs(t));
  for (std::size_t j = 0; j < m; ++j) {
    const auto v = dec.eigenvectors.column(j);
    const auto tv = t.apply(v);
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) res = std::max(res, std::abs(tv[i] - dec.eigenvalues[j] * v[i]));
    ASSERT_LE(res, tol * scale) << "residual, column " << j;
  }
  // V^T V = I, checked on a sample of column pairs for large m.
  const std::size_t stride = m > 300 ? m / 97 : 1;
  for (std::size_t a = 0; a < m; a += stride)
    for (std::size_t b = a; b < m; b += stride) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += dec.eigenvectors(i, a) * dec.eigenvectors(i, b);
      ASSERT_NEAR(dot, a == b ? 1.0 : 0.0, tol) << a << "," << b;
    }
}

}  // namespace

TEST(Tridiagonal, OneByOne) {
  const auto dec = catsim::numkit::eigh_tridiagonal({{3.5}, {}});
  ASSERT_EQ(dec.eigenvalues.size(), 1u);
  EXPECT_DOUBLE_EQ(dec.eigenvalues[0], 3.5);
  EXPECT_DOUBLE_EQ(std::abs(dec.eigenvectors(0, 0)), 1.0);
}

TEST(Tridiagonal, TwoByTwoZeroDiagonal) {
  const auto dec = catsim::numkit::eigh_tridiagonal({{0.0, 0.0}, {2.0}});
  EXPECT_NEAR(dec.eigenvalues[0], -2.0, 1e-14);
  EXPECT_NEAR(dec.eigenvalues[1], 2.0, 1e-14);
  EXPECT_NEAR(std::abs(dec.eigenvectors(0, 1)), 1.0 / std::numbers::sqrt2, 1e-14);
}

TEST(Tridiagonal, BlockFourEigenvalues) {
  // couplings sqrt(12) and 2: eigenvalues 0 and +-sqrt(12 + 4)
  const auto dec = catsim::numkit::eigh_tridiagonal(catsim::block_matrix(4));
  ASSERT_EQ(dec.eigenvalues.size(), 3u);
  EXPECT_NEAR(dec.eigenvalues[0], -4.0, 1e-13);
  EXPECT_NEAR(dec.eigenvalues[1], 0.0, 1e-13);
  EXPECT_NEAR(dec.eigenvalues[2], 4.0, 1e-13);
}

TEST(Tridiagonal, RejectsMalformedInput) {
  EXPECT_THROW(catsim::numkit::eigh_tridiagonal({{}, {}}), std::invalid_argument);
  EXPECT_THROW(catsim::numkit::eigh_tridiagonal({{0.0, 1.0}, {}}), std::invalid_argument);
  EXPECT_THROW(catsim::numkit::eigh_tridiagonal({{0.0, NAN}, {1.0}}), std::invalid_argument);
  EXPECT_THROW(catsim::numkit::eigh_tridiagonal({{0.0, 0.0}, {INFINITY}}), std::invalid_argument);
}

TEST(Tridiagonal, RandomOrthonormalityAndResidual) {
  std::mt19937_64 rng(12345);
  for (std::size_t m : {3u, 17u, 64u, 250u, 800u, 2000u}) {
    SCOPED_TRACE(m);
    expect_orthonormal_eigenpairs(random_tridiagonal(m, rng, false), 1e-10);
  }
}

TEST(Tridiagonal, ZeroDiagonalSpectrumIsSymmetric) {
  std::mt19937_64 rng(7);
  for (std::size_t m : {5u, 30u, 301u}) {
    const auto dec = catsim::numkit::eigh_tridiagonal(random_tridiagonal(m, rng, true));
    for (std::size_t j = 0; j < m; ++j)
      EXPECT_NEAR(dec.eigenvalues[j], -dec.eigenvalues[m - 1 - j], 1e-11);
  }
  for (std::size_t total : {10u, 101u, 400u}) {
    const auto spec = catsim::block_spectrum(total);
    const std::size_t m = spec.eigenvalues.size();
    const double scale = std::abs(spec.eigenvalues.back());
    for (std::size_t j = 0; j < m; ++j)
      EXPECT_NEAR(spec.eigenvalues[j], -spec.eigenvalues[m - 1 - j], 1e-12 * scale) << total;
  }
}

TEST(Tridiagonal, AgreesWithDenseSolver) {
  std::mt19937_64 rng(99);
  for (std::size_t m : {2u, 9u, 50u}) {
    const auto t = random_tridiagonal(m, rng, false);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = t.diag[i];
      if (i + 1 < m) {
        dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = t.offdiag[i];
        dense(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = t.offdiag[i];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(dense, Eigen::EigenvaluesOnly);
    const auto dec = catsim::numkit::eigh_tridiagonal(t);
    for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(dec.eigenvalues[j], ref.eigenvalues()(static_cast<Eigen::Index>(j)), 1e-12);
  }
}

TEST(Tridiagonal, RowSubsetMatchesFullDecomposition) {
  std::mt19937_64 rng(3);
  const auto t = random_tridiagonal(120, rng, true);
  const auto full = catsim::numkit::eigh_tridiagonal(t);
  const std::vector<std::size_t> rows{0, 37, 119};
  const auto part = catsim::numkit::eigh_tridiagonal_rows(t, rows);
  ASSERT_EQ(part.rows.rows(), rows.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    EXPECT_NEAR(part.eigenvalues[j], full.eigenvalues[j], 1e-12);
    for (std::size_t r = 0; r < rows.size(); ++r)
      EXPECT_NEAR(part.rows(r, j), full.eigenvectors(rows[r], j), 1e-12);
  }
  const std::vector<std::size_t> bad{120};
  EXPECT_THROW(catsim::numkit::eigh_tridiagonal_rows(t, bad), std::invalid_argument);
}

TEST(Minimize, Parabola) {
  const auto m = catsim::numkit::minimize_scalar([](double x) { return (x - 1.3) * (x - 1.3) + 2.0; }, 0.0, 4.0);
  EXPECT_NEAR(m.x, 1.3, 1e-8);
  EXPECT_NEAR(m.fx, 2.0, 1e-14);
}

TEST(Minimize, CosineOnTwoToFour) {
  const auto m = catsim::numkit::minimize_scalar([](double x) { return std::cos(x); }, 2.0, 4.0);
  EXPECT_NEAR(m.x, std::numbers::pi, 1e-8);
  EXPECT_NEAR(m.fx, -1.0, 1e-14);
}

TEST(Minimize, MonotoneBracketIsReported) {
  EXPECT_THROW(catsim::numkit::minimize_scalar([](double x) { return x; }, 0.0, 1.0), catsim::numeric_error);
  EXPECT_THROW(catsim::numkit::minimize_scalar([](double x) { return x; }, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(catsim::numkit::minimize_scalar([](double x) { return x; }, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Nls, RecoversSyntheticPowerLaw) {
  using catsim::numkit::FitLaw;
  const std::vector<double> truth{1.7, 1.16, 0.84};
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(2.0 + 8.0 * i);
    y.push_back(catsim::numkit::evaluate_law(FitLaw::TauOpt, truth, x.back()));
  }
  const auto fit = catsim::numkit::nls_fit(FitLaw::TauOpt, x, y, {1.2, 1.5, 0.7});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(fit.params[i], truth[i], 1e-6 * truth[i]);
  EXPECT_LT(fit.residual_rms, 1e-10);
  EXPECT_NEAR(fit(10.0), catsim::numkit::evaluate_law(FitLaw::TauOpt, truth, 10.0), 1e-10);
}

TEST(Nls, RecoversSyntheticOffsetLaw) {
  using catsim::numkit::FitLaw;
  const std::vector<double> truth{-0.35, 0.14, 0.13, 2.4};
  std::vector<double> x, y;
  for (int i = 0; i < 15; ++i) {
    x.push_back(2.0 + 7.0 * i);
    y.push_back(catsim::numkit::evaluate_law(FitLaw::XiPrep, truth, x.back()));
  }
  const auto fit = catsim::numkit::nls_fit(FitLaw::XiPrep, x, y, {-0.3, 0.1, 0.2, 2.0});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(fit.params[i], truth[i], 1e-6 * std::abs(truth[i]));
}

TEST(Nls, ConstantDataDoesNotThrowAndFitsFlat) {
  using catsim::numkit::FitLaw;
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7}, y(7, 0.5);
  const auto fit = catsim::numkit::nls_fit(FitLaw::PZero, x, y, {1.0, 1.0, 1.0});
  for (double xi : x) EXPECT_NEAR(fit(xi), 0.5, 1e-4);
}

TEST(Nls, Preconditions) {
  using catsim::numkit::FitLaw;
  const std::vector<double> x{1, 2, 3, 4, 5}, y{1, 2, 3, 4, 5};
  EXPECT_THROW(catsim::numkit::nls_fit(FitLaw::TauOpt, x, y, {1, 1, 1}), std::invalid_argument);
  const std::vector<double> x6{1, 2, 3, 4, 5, 6}, y5{1, 2, 3, 4, 5};
  EXPECT_THROW(catsim::numkit::nls_fit(FitLaw::TauOpt, x6, y5, {1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(catsim::numkit::nls_fit(FitLaw::TauOpt, x6, x6, {1, 1}), std::invalid_argument);
  EXPECT_THROW(catsim::numkit::fit_law_from_string("gamma"), std::invalid_argument);
  EXPECT_EQ(catsim::numkit::fit_law_from_string("xi"), FitLaw::XiPrep);
}

TEST(Special, LogFactorial) {
  EXPECT_NEAR(catsim::numkit::log_factorial(10), std::log(3628800.0), 1e-13);
  EXPECT_EQ(catsim::numkit::log_factorial(0), 0.0);
  double acc = 0.0;
  for (int n = 1; n <= 60; ++n) {
    acc += std::log(static_cast<double>(n));
    EXPECT_NEAR(catsim::numkit::log_factorial(n), acc, 1e-12 * acc) << n;
  }
  EXPECT_THROW(catsim::numkit::log_factorial(-1), std::invalid_argument);
}

TEST(Special, PoissonPmfSumsToOne) {
  double s = 0.0;
  for (int n = 0; n < 200; ++n) s += std::exp(catsim::numkit::log_poisson_pmf(25.0, n));
  EXPECT_NEAR(s, 1.0, 1e-13);
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "catsim/hilbert.hpp"

namespace {

// Poisson pmf by running product, independent of log_factorial.
std::vector<double> poisson_by_product(double mean, std::size_t n_max) {
  std::vector<double> p(n_max + 1);
  p[0] = std::exp(-mean);
  for (std::size_t n = 1; n <= n_max; ++n) p[n] = p[n - 1] * mean / static_cast<double>(n);
  return p;
}

}  // namespace

TEST(Coherent, AmplitudesMatchPoisson) {
  const auto v = catsim::coherent_amplitudes(3.0, 80);
  const auto p = poisson_by_product(9.0, 80);
  for (std::size_t n = 0; n <= 80; ++n) EXPECT_NEAR(std::norm(v[n]), p[n], 1e-15 + 1e-12 * p[n]) << n;
  EXPECT_TRUE(v.is_normalized());
  EXPECT_NEAR(v.mean_photons(), 9.0, 1e-10);
  EXPECT_THROW(catsim::coherent_amplitudes(-1.0, 4), std::invalid_argument);
  EXPECT_EQ(catsim::coherent_amplitudes(0.0, 3)[0], catsim::complex(1.0, 0.0));
}

TEST(Cutoff, IsSmallestBoundingTheTail) {
  for (double beta : {0.5, 1.5, 2.0, 5.0, 10.0}) {
    for (double eps : {1e-6, 1e-12}) {
      const auto total = catsim::choose_cutoff(beta, eps);
      ASSERT_EQ(total % 2, 0u);
      const std::size_t m = total / 2;
      const auto p = poisson_by_product(beta * beta, m + 400);
      auto tail_beyond = [&](std::size_t k) {
        double s = 0.0;
        for (std::size_t n = p.size(); n-- > k + 1;) s += p[n];
        return s;
      };
      EXPECT_LE(tail_beyond(m), eps) << beta << " " << eps;
      if (m > 0) {
        EXPECT_GT(tail_beyond(m - 1), eps) << beta << " " << eps;
      }
    }
  }
  EXPECT_EQ(catsim::choose_cutoff(0.0, 1e-12), 0u);
  EXPECT_THROW(catsim::choose_cutoff(1.0, 0.0), std::invalid_argument);
}

TEST(BlockStateInit, PumpCoherentSignalVacuum) {
  const auto s = catsim::initial_block_state(2.0);
  EXPECT_NEAR(std::norm(s.amplitude(8, 4)), 0.19536681481316454, 1e-12);
  EXPECT_EQ(s.amplitude(8, 3), catsim::complex{});
  EXPECT_FALSE(s.populated(7));
  EXPECT_NEAR(s.squared_norm(), 1.0, 1e-12);
  const auto occ = catsim::mean_occupations(s);
  EXPECT_NEAR(occ.mean_ns, 0.0, 1e-15);
  EXPECT_NEAR(occ.mean_np, 4.0, 1e-10);
  EXPECT_EQ(catsim::BlockState::block_size(9), 5u);
}

TEST(BlockStateInit, VacuumPumpIsSingleBlock) {
  const auto s = catsim::initial_block_state(0.0);
  EXPECT_EQ(s.max_total(), 0u);
  EXPECT_EQ(s.amplitude(0, 0), catsim::complex(1.0, 0.0));
}

TEST(FockVectorTest, NormalizationFlags) {
  const catsim::FockVector v({{0.6, 0.0}, {0.0, 0.8}});
  EXPECT_TRUE(v.is_normalized());
  const auto u = catsim::FockVector::unnormalized({{0.3, 0.0}, {0.4, 0.0}});
  EXPECT_FALSE(u.is_normalized());
  EXPECT_NEAR(u.normalized().norm(), 1.0, 1e-15);
  EXPECT_THROW(catsim::FockVector::unnormalized({0.0, 0.0}).normalized(), catsim::numeric_error);
  EXPECT_THROW(catsim::FockVector(std::vector<catsim::complex>{}), std::invalid_argument);
  EXPECT_EQ(v.at_or_zero(5), catsim::complex{});
  EXPECT_EQ(v.resized(4).size(), 5u);
}

TEST(Herald, ProjectionAtTimeZero) {
  const auto s = catsim::initial_block_state(1.5);
  const auto h = catsim::extract_signal_if_pump_vacuum(s);
  EXPECT_TRUE(h.defined());
  EXPECT_NEAR(h.p0, std::exp(-2.25), 1e-12);  // relative to the truncated norm
  EXPECT_FALSE(h.state.is_normalized());
}

TEST(Json, FockVectorRoundTrip) {
  const catsim::FockVector v({{0.6, 0.1}, {-0.2, 0.7}, {0.1, -0.2981610303}});
  const auto back = catsim::fock_vector_from_json(nlohmann::json::parse(catsim::to_json(v).dump()));
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t n = 0; n < v.size(); ++n) EXPECT_EQ(back[n], v[n]);
  EXPECT_THROW(catsim::fock_vector_from_json(nlohmann::json{{"re", {1.0}}, {"im", {0.0, 1.0}}}),
               std::invalid_argument);
}

TEST(Json, BlockStateRoundTrip) {
  const auto s = catsim::initial_block_state(1.2, 1e-8);
  const auto back = catsim::block_state_from_json(nlohmann::json::parse(catsim::to_json(s).dump()));
  ASSERT_EQ(back.max_total(), s.max_total());
  EXPECT_EQ(back.beta(), s.beta());
  for (std::size_t n = 0; n <= s.max_total(); ++n)
    for (std::size_t k = 0; k < catsim::BlockState::block_size(n); ++k)
      EXPECT_EQ(back.amplitude(n, k), s.amplitude(n, k));
}

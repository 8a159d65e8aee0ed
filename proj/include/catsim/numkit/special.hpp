#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace catsim::numkit {

namespace detail {
inline const std::array<double, 21>& small_log_factorials() {
  static const std::array<double, 21> table = [] {
    std::array<double, 21> t{};
    std::uint64_t f = 1;
    for (std::uint64_t n = 0; n < t.size(); ++n) {
      if (n > 0) f *= n;
      t[n] = std::log(static_cast<double>(f));
    }
    return t;
  }();
  return table;
}
}  // namespace detail

/// ln(n!)
inline double log_factorial(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
  const auto& table = detail::small_log_factorials();
  if (static_cast<std::size_t>(n) < table.size()) return table[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

/// ln of the Poisson(mean) probability mass at n; mean > 0.
inline double log_poisson_pmf(double mean, std::int64_t n) {
  return -mean + static_cast<double>(n) * std::log(mean) - log_factorial(n);
}

}  // namespace catsim::numkit

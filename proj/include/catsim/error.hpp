#pragma once

#include <stdexcept>
#include <string>

namespace catsim {

// Raised when a computation cannot produce a trustworthy result (divergence,
// truncation loss, failed bracketing). Bad arguments use std::invalid_argument
// or std::domain_error instead.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace catsim

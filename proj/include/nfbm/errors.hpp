#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nfbm {

/// Base class for all errors thrown by this library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two vectors (or an operator and a vector) with incompatible sizes.
struct dimension_error : error {
  dimension_error(std::size_t got, std::size_t want, const std::string& where)
      : error(where + ": dimension mismatch (" + std::to_string(got) +
              " vs " + std::to_string(want) + ")"),
        got(got),
        want(want) {}
  std::size_t got;
  std::size_t want;
};

/// A scalar parameter outside its admissible range.
struct parameter_error : error {
  using error::error;
};

/// A metric that fails strong monotonicity numerically.
struct metric_error : error {
  using error::error;
};

/// Non-finite values produced while iterating.
struct divergence_error : error {
  divergence_error(std::size_t iteration, const std::string& what)
      : error(what + " at iteration " + std::to_string(iteration)),
        iteration(iteration) {}
  std::size_t iteration;
};

/// A closed-form parameter formula produced no admissible value.
struct infeasible_error : error {
  infeasible_error(const std::string& quantity, const std::string& why)
      : error("infeasible parameter " + quantity + ": " + why),
        quantity(quantity) {}
  std::string quantity;
};

struct io_error : error {
  using error::error;
};

}  // namespace nfbm

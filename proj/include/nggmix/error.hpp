#pragma once

#include <random>
#include <stdexcept>
#include <string>

namespace nggmix {

/// Bad input or configuration. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while sampling or solving numerically. The CLI maps this to exit code 3.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

}  // namespace nggmix

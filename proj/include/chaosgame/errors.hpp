#pragma once

#include <stdexcept>
#include <string>

namespace chaosgame {

/// Bad input: malformed config, precondition violated, non-contractive map.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A bounded search or simulation ran past its cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested size (points, words, bitset) exceeds the configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something that must hold mathematically did not; indicates a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace chaosgame

#pragma once

#include <stdexcept>
#include <string>

namespace bnaf {

// Shape disagreement between operands (matmul inner dims, elementwise shapes).
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input outside an operation's mathematical domain (log of non-positive,
// empty reduction axis, degenerate weight row).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration values (non-positive dimensions, unknown kinds).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse (e.g. backward on a non-scalar root).
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value produced from finite inputs, NaN gradients.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative method failed to bracket or converge.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or unreadable files (checkpoints, CSV inputs).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bnaf

#pragma once

#include <stdexcept>

namespace qkp {

// Error categories surfaced by the command line as distinct exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qkp

#pragma once

#include <stdexcept>
#include <string>

namespace hdltex {

// Malformed or inconsistent input data (bad TSV rows, label conflicts,
// degenerate datasets). The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training. CLI exit code 3.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Corrupt, truncated, or incompatible model container.
struct ContainerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hdltex

#pragma once

#include <stdexcept>
#include <string>

namespace hyperpart {

/// Tensor shapes (order or dimension) do not match.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A parameter is outside its admissible range.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file; `line` is 1-based, 0 when unknown.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line(line) {}
  std::size_t line;
};

}  // namespace hyperpart

#pragma once

#include <stdexcept>
#include <string>

namespace srad {

// Error taxonomy mirrors the CLI exit codes: usage=1, data=2, io=3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : Error {
  using Error::Error;
};

// Malformed text input (manifest lines, ground-truth lines).
struct ParseError : Error {
  using Error::Error;
};

// Dimension or layout disagreement between declared and actual data.
struct ShapeError : Error {
  using Error::Error;
};

// Data that parses but violates a domain invariant.
struct ValidationError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace srad

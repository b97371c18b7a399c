#pragma once

#include <stdexcept>
#include <string>

namespace usv {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sample stream violated ordering or finiteness guarantees.
struct StreamIntegrityError : Error {
  using Error::Error;
};

// Malformed text input; carries the 1-based record index.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (record " + std::to_string(line) + ")"), line(line) {}
  std::size_t line;
};

// An operation precondition was violated by the caller.
struct ContractViolation : Error {
  using Error::Error;
};

// Bad magic/version/length while decoding a transport frame.
struct FramingError : Error {
  using Error::Error;
};

// Connection died mid-frame; no partial packet is surfaced.
struct IncompleteFrameError : Error {
  using Error::Error;
};

// Weight file is corrupt, truncated, or built for another config.
struct WeightsError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace usv

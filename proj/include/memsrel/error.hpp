#pragma once

#include <stdexcept>
#include <string>

namespace memsrel {

/// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Too few samples, specimens or log entries for an analysis.
struct InsufficientData : Error {
  using Error::Error;
};

/// Data that cannot support a fit (e.g. zero variance).
struct DegenerateData : Error {
  using Error::Error;
};

/// A curve without any detected hinge failure where one is required.
struct NoFailure : Error {
  using Error::Error;
};

/// Protocol exceeding the rig's force, frequency or travel limits.
struct ProtocolLimit : Error {
  using Error::Error;
};

/// Dynamic hold force would fracture the specimen.
struct Overload : Error {
  using Error::Error;
};

/// Malformed input file or configuration value.
struct ParseError : Error {
  using Error::Error;
};

/// File system failure (open, write, rename).
struct IoError : Error {
  using Error::Error;
};

}  // namespace memsrel

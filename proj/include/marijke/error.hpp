#pragma once

#include <stdexcept>
#include <string>

namespace marijke {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A PlantConfig (or config file) that violates its invariants.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed action text, trace record, scenario line or wire message.
class ParseError : public Error {
public:
  using Error::Error;
};

/// An action that is not well-typed under the active configuration.
class InvalidAction : public Error {
public:
  using Error::Error;
};

/// Stepping the controller with an action that is not enabled.
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// A checker precondition was not met (e.g. graph not exhaustive).
class CheckerError : public Error {
public:
  using Error::Error;
};

/// Fault injection refused (bad target or conflicting kind).
class FaultError : public Error {
public:
  using Error::Error;
};

} // namespace marijke

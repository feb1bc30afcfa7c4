#pragma once

#include <stdexcept>
#include <string>

namespace llmconf {

// Error hierarchy. Each category maps onto one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

// Raised when a feature cannot be computed for the given input
// (e.g. fewer than two responses to compare).
class InapplicableFeature : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

// Endpoint unreachable or answered 5xx after all retries.
class TransportError : public OracleError {
 public:
  using OracleError::OracleError;
};

// Endpoint answered, but the body does not match the wire contract.
class ProtocolError : public OracleError {
 public:
  using OracleError::OracleError;
};

}  // namespace llmconf

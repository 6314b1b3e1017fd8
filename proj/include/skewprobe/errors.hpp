#pragma once

#include <stdexcept>
#include <string>

namespace skewprobe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (JSON, TSV, JSONL). Message names line and/or field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Caller passed an argument outside the accepted domain (unknown id, bad flag).
class UsageError : public Error {
 public:
  using Error::Error;
};

class SessionError : public Error {
 public:
  using Error::Error;
};

// Replay trace has no entry for the requested key.
class ReplayError : public Error {
 public:
  using Error::Error;
};

// Transport failure that survived the bounded transport-level retries.
class ProviderError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

// Metric requested over an empty or fully undefined input.
class MetricError : public Error {
 public:
  using Error::Error;
};

class ReportError : public Error {
 public:
  using Error::Error;
};

}  // namespace skewprobe

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flb {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An observation trace too short to estimate anything from.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// The MO's accuracy demand cannot be met within the contracted sessions.
class InfeasibleContract : public Error {
 public:
  using Error::Error;
};

/// A scenario option combination that the selected model cannot honor.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class OracleFailure : public Error {
 public:
  using Error::Error;
};

/// Background load plus the FL load exceeds the UE's maximum CPU frequency.
class FrequencyCapViolation : public Error {
 public:
  FrequencyCapViolation(std::size_t session, double required_hz, double f_max_hz);

  /// Zero-based session index.
  std::size_t session() const noexcept { return session_; }
  double required_hz() const noexcept { return required_hz_; }
  double f_max_hz() const noexcept { return f_max_hz_; }

 private:
  std::size_t session_;
  double required_hz_;
  double f_max_hz_;
};

/// Malformed scenario text; carries a 1-based position when one is known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& what);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flb

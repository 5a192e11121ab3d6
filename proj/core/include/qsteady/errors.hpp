#pragma once

#include <stdexcept>
#include <string>

namespace qsteady {

// Broad failure classes. The command-line tool maps these onto exit codes.
enum class ErrorKind {
  config,             // malformed or out-of-range configuration
  contract,           // a numerical pre/post-condition was violated
  degeneracy,         // steady state is not unique
  unsupported,        // input outside what an operation supports
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, int null_dimension)
      : Error(ErrorKind::degeneracy, what), null_dimension_(null_dimension) {}

  // Number of (numerically) vanishing singular values found, or -1 if only
  // the fact of degeneracy is known.
  int null_dimension() const noexcept { return null_dimension_; }

 private:
  int null_dimension_;
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(ErrorKind::unsupported, what) {}
};

// Specific contract failures that callers commonly need to tell apart.
class InvalidGraphError : public ContractError {
 public:
  using ContractError::ContractError;
};

class InvalidSupportError : public ContractError {
 public:
  using ContractError::ContractError;
};

class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

class RankDeficiencyError : public ContractError {
 public:
  RankDeficiencyError(const std::string& what, double eigenvalue)
      : ContractError(what), eigenvalue_(eigenvalue) {}

  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

}  // namespace qsteady

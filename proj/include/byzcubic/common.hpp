#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace byzcubic {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed LIBSVM input. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Requested computation is outside what the library supports
/// (e.g. a dense Hessian above the size limit).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The inner cubic solver iterate blew past its divergence guard.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A worker update with non-finite entries reached the coordinator.
class RoundAbort : public Error {
 public:
  RoundAbort(int worker_id, const std::string& what)
      : Error(what), worker_id_(worker_id) {}
  int worker_id() const { return worker_id_; }

 private:
  int worker_id_;
};

}  // namespace byzcubic

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad hyper-parameter, empty input, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& what, std::size_t offending_index)
      : Error(what), offending_index_(offending_index) {}

  std::size_t offending_index() const noexcept { return offending_index_; }

 private:
  std::size_t offending_index_;
};

/// A run produced a non-finite iterate or objective value. `epoch` is the 1-based
/// row of the trace at which the problem was detected.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, std::size_t epoch) : Error(what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line) : Error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace smg

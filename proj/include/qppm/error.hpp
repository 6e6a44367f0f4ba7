#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qppm {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (XML syntax, broken CSV quoting).
class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// A single record (event, row) is unusable. `where` names the trace or row.
class RecordError : public Error {
  public:
    RecordError(const std::string &what, std::string where)
        : Error(what + " [" + where + "]"), where_(std::move(where)) {}
    [[nodiscard]] const std::string &where() const noexcept { return where_; }

  private:
    std::string where_;
};

/// Invalid parameters or configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Training data does not allow a model (e.g. a single label class).
class DegenerateModelError : public Error {
  public:
    using Error::Error;
};

class ConvergenceError : public Error {
  public:
    using Error::Error;
};

/// Numerical breakdown during iterative training.
class TrainingError : public Error {
  public:
    TrainingError(const std::string &what, std::size_t epoch)
        : Error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch) {}
    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }

  private:
    std::size_t epoch_;
};

} // namespace qppm

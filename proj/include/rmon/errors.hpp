#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lengths of two interval vectors (or a vector and a spec) disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Structural problem in a knowledge base: unknown names, conflicting bindings.
class KnowledgeBaseError : public Error {
 public:
  using Error::Error;
};

/// Failure while evaluating a relation body.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. Line and column are 1-based; the file name
/// is attached by whoever knows it (see set_file).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message), line_(line), column_(column), bare_(message) {
    compose();
  }

  const char* what() const noexcept override { return full_.c_str(); }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& file() const noexcept { return file_; }
  const std::string& bare_message() const noexcept { return bare_; }

  void set_file(std::string file) {
    file_ = std::move(file);
    compose();
  }

 private:
  void compose() {
    full_ = (file_.empty() ? std::string() : file_ + ":") + std::to_string(line_) + ":" +
            std::to_string(column_) + ": " + bare_;
  }

  std::size_t line_;
  std::size_t column_;
  std::string bare_;
  std::string file_;
  std::string full_;
};

/// The monitored variable has no valid substitution.
class NotMonitorableError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or scenario parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmon

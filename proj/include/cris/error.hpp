#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cris {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedIri : public Error {
 public:
  using Error::Error;
};

class UnknownPrefix : public Error {
 public:
  explicit UnknownPrefix(std::string prefix)
      : Error("unknown prefix '" + prefix + "'"), prefix_(std::move(prefix)) {}
  const std::string& prefix() const noexcept { return prefix_; }

 private:
  std::string prefix_;
};

class InvalidTriple : public Error {
 public:
  using Error::Error;
};

class InvalidSchemaTriple : public Error {
 public:
  using Error::Error;
};

/// Query text does not match the grammar. position is a byte offset.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("syntax error at " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnboundVariable : public Error {
 public:
  UnboundVariable(std::string name, std::size_t position)
      : Error("variable " + name + " is not bound by any pattern"),
        name_(std::move(name)),
        position_(position) {}
  const std::string& name() const noexcept { return name_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string name_;
  std::size_t position_;
};

class UnknownType : public Error {
 public:
  using Error::Error;
};

class UnknownProperty : public Error {
 public:
  using Error::Error;
};

class DanglingReference : public Error {
 public:
  using Error::Error;
};

class RecordFileError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cris

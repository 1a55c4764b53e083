#pragma once

#include <stdexcept>
#include <string>

namespace riemap {

/// Categories used for reporting and for the CLI exit-status contract.
enum class ErrorKind {
  Syntax,
  UnknownIdentifier,
  Domain,
  OrderTooLarge,
  OrderExceeded,
  NotPositiveDefinite,
  RankUnstable,
  ExtensionRequired,
  Schema,
  EmptyDistribution,
  NotSpaceForm,
  UnknownScene,
  Dimension,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors caused by numeric evaluation at a point, as opposed to a
  /// malformed scene.
  bool is_numeric() const noexcept;

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& expected, const std::string& found);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public Error {
 public:
  explicit UnknownIdentifier(const std::string& name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DomainError : public Error {
 public:
  DomainError(const std::string& function, double value);
};

}  // namespace riemap

#include "riemap/errors.hpp"

#include <sstream>

namespace riemap {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::OrderTooLarge: return "OrderTooLarge";
    case ErrorKind::OrderExceeded: return "OrderExceeded";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::RankUnstable: return "RankUnstable";
    case ErrorKind::ExtensionRequired: return "ExtensionRequired";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::EmptyDistribution: return "EmptyDistribution";
    case ErrorKind::NotSpaceForm: return "NotSpaceForm";
    case ErrorKind::UnknownScene: return "UnknownScene";
    case ErrorKind::Dimension: return "DimensionMismatch";
  }
  return "Error";
}

bool Error::is_numeric() const noexcept {
  switch (kind_) {
    case ErrorKind::Domain:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::RankUnstable:
    case ErrorKind::OrderTooLarge:
    case ErrorKind::OrderExceeded:
    case ErrorKind::NotSpaceForm:
    case ErrorKind::EmptyDistribution:
      return true;
    default:
      return false;
  }
}

namespace {

std::string syntax_message(std::size_t position, const std::string& expected,
                           const std::string& found) {
  std::ostringstream os;
  os << "syntax error at position " << position << ": expected " << expected << ", found "
     << (found.empty() ? "end of input" : "'" + found + "'");
  return os.str();
}

std::string domain_message(const std::string& function, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "domain error in " << function << " at argument " << value;
  return os.str();
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position, const std::string& expected,
                         const std::string& found)
    : Error(ErrorKind::Syntax, syntax_message(position, expected, found)), position_(position) {}

UnknownIdentifier::UnknownIdentifier(const std::string& name)
    : Error(ErrorKind::UnknownIdentifier, "unknown identifier '" + name + "'"), name_(name) {}

DomainError::DomainError(const std::string& function, double value)
    : Error(ErrorKind::Domain, domain_message(function, value)) {}

}  // namespace riemap

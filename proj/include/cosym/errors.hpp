#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cosym {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the failure.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error("syntax error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifierError : public Error {
 public:
  UnknownIdentifierError(std::string name, std::size_t offset)
      : Error("unknown identifier \"" + name + "\" at offset " + std::to_string(offset)),
        name_(std::move(name)),
        offset_(offset) {}
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

/// Evaluation outside the domain of a subexpression (log of a nonpositive
/// value, division by zero).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : Error(what + " in \"" + subexpression + "\""), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

class DegreeError : public Error {
 public:
  using Error::Error;
};

class ChartMismatchError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class TransversalityError : public Error {
 public:
  using Error::Error;
};

class NonSymplecticFieldError : public Error {
 public:
  using Error::Error;
};

class BasicnessError : public Error {
 public:
  using Error::Error;
};

class NonCompactGroupError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

}  // namespace cosym

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bullysig {

// Root of every error the library raises. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a data-model invariant.
class IntegrityError : public Error {
 public:
  IntegrityError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit IntegrityError(const std::string& what) : IntegrityError(0, what) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class StratificationError : public Error {
 public:
  using Error::Error;
};

// A metric that is mathematically undefined for the given input
// (single-class AUC, kappa with chance agreement of 1 and imperfect agreement).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// A required external resource (lexicon, term list, topic model) is missing
// or inconsistent with the feature space it is used against.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace bullysig

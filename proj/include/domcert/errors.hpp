#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace domcert {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidRate : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// A linear equation or inequality with no solution by theory (e.g. unimodular spectrum).
class NoSolution : public Error {
 public:
  using Error::Error;
};

class EmptyLanguage : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::size_t cap) : Error(what), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class StaleCertificate : public Error {
 public:
  using Error::Error;
};

class AdmissibilityError : public Error {
 public:
  AdmissibilityError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  // Index into the label sequence of the first label that cannot be read.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class GapError : public Error {
 public:
  using Error::Error;
};

class DegenerateStart : public Error {
 public:
  using Error::Error;
};

}  // namespace domcert

#pragma once

#include <stdexcept>
#include <string>

namespace uavplan {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A scenario, plan or manifest file could not be understood.
class ParseError : public Error {
 public:
  ParseError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Two coverage footprints would serve the same user.
class InterferenceRisk : public Error {
 public:
  using Error::Error;
};

/// The requested baseline layout cannot be realised in the region.
class InfeasibleBaseline : public Error {
 public:
  using Error::Error;
};

}  // namespace uavplan

#pragma once

#include <stdexcept>
#include <string>

namespace reinforce {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A file or JSON document does not match the expected format. The message
/// carries file/field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A partition does not cover the node set, overlaps, or is otherwise unusable.
class InvalidPartition : public Error {
 public:
  using Error::Error;
};

/// A pluggable component (scheduling algorithm, adversary) broke its contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace reinforce

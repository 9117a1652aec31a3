#ifndef SHRINK_ERROR_HPP_
#define SHRINK_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace shrink {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An enumeration would visit more words than its budget allows.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// A length table or target is asked for a word deeper than it knows.
class DepthExceeded : public Error {
 public:
  using Error::Error;
};

class PrefixExhausted : public Error {
 public:
  using Error::Error;
};

class NearSingular : public Error {
 public:
  using Error::Error;
};

/// Argument outside of the range a function accepts (e.g. s outside [0, d]).
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NoConnector : public Error {
 public:
  using Error::Error;
};

class NotInTree : public Error {
 public:
  using Error::Error;
};

/// The pressure does not change sign on the requested interval.
class NonBracketing : public Error {
 public:
  using Error::Error;
};

}  // namespace shrink

#endif  // SHRINK_ERROR_HPP_

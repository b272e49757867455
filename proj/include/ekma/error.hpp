#pragma once

#include <stdexcept>
#include <string>

namespace ekma {

// Base class for every fatal condition raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incomplete input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Network failure while fetching archives. `retryable()` is true for
// transport failures and non-success HTTP statuses.
class HttpError : public Error {
 public:
  HttpError(const std::string& what, int status, bool retryable)
      : Error(what), status_(status), retryable_(retryable) {}

  int status() const noexcept { return status_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  int status_;
  bool retryable_;
};

}  // namespace ekma

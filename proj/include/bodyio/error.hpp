#pragma once

#include <stdexcept>
#include <string>

namespace bodyio {

/// Coarse failure category. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Argument = 1,   ///< caller violated a precondition (shape, range, ordering)
  Config = 2,     ///< configuration document rejected
  Data = 3,       ///< malformed or inconsistent input data
  Numerical = 4,  ///< numerical failure (singular update, invalid rotation)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace bodyio

#pragma once

#include <stdexcept>
#include <string>

namespace grabit {

// Broad failure categories. The CLI maps each one to its own exit code.
enum class ErrorKind {
  kInvalidArgument,  // bad configuration or call contract
  kIo,               // unreadable / unwritable file
  kSchema,           // malformed tabular input or model document
  kBounds,           // response outside the censoring interval
  kNumerical,        // non-finite values, failed optimization
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

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::kInvalidArgument, what);
}

}  // namespace grabit

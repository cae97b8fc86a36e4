#pragma once

#include <stdexcept>
#include <string>

namespace bwe {

enum class ErrorKind {
  invalid_argument,
  unreadable_file,
  unsupported_encoding,
  io_failure,
};

inline const char* to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::unreadable_file: return "unreadable file";
    case ErrorKind::unsupported_encoding: return "unsupported encoding";
    case ErrorKind::io_failure: return "i/o failure";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the ErrorKind values so
/// callers (the CLI in particular) can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorKind::invalid_argument, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw_invalid(what);
}

}  // namespace bwe

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace splitcv {

enum class ErrorKind {
  InvalidParameter,
  Dimension,
  Format,
  Io,
  Unsupported,
  Numerical,
  Divergence,
  Calibration,
  Lookup,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the core. The C API maps `kind()` onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Format errors carry the byte offset at which parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(ErrorKind::Format, what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace splitcv

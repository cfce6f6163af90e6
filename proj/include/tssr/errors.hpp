#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tssr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes or orders do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A supplied value is not acceptable (e.g. NaN or infinity in tensor data).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// An argument is out of its allowed range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for this kind of system (e.g. time-varying).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed system file. `where` is a byte offset or a field path.
class ParseError : public Error {
 public:
  ParseError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// A computation left the finite range of doubles.
class OverflowError : public Error {
 public:
  explicit OverflowError(const std::string& what, std::int64_t step = -1)
      : Error(step >= 0 ? what + " at step " + std::to_string(step) : what), step_(step) {}
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

/// A multirate evaluation needed boundary data that was not supplied.
class BoundaryError : public Error {
 public:
  BoundaryError(std::size_t process, std::int64_t index, const std::string& detail = {})
      : Error("missing boundary value for process " + std::to_string(process) + " at index " +
              std::to_string(index) + (detail.empty() ? "" : " (" + detail + ")")),
        process_(process),
        index_(index) {}
  std::size_t process() const noexcept { return process_; }
  std::int64_t index() const noexcept { return index_; }

 private:
  std::size_t process_;
  std::int64_t index_;
};

}  // namespace tssr

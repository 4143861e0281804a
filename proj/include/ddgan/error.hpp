#pragma once

#include <stdexcept>
#include <string>

namespace ddgan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, dimension mismatches, out-of-domain points.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A loss requested derivatives the forward pass did not record.
class UnsupportedComposition : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised by the optimizer and trainer when a loss or gradient blows up.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  enum class Kind { empty, format, truncated, checksum, io };

  DatasetError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace ddgan

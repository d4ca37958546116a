#pragma once

#include <stdexcept>
#include <string>

namespace kbmatch {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its valid range or two settings are incompatible.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An input file is missing or unreadable.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kbmatch

#pragma once

#include <stdexcept>
#include <string>

namespace specleak {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be read/written or had the wrong top-level shape.
class IoError : public Error {
public:
  using Error::Error;
};

/// A manifest or artifact file was well-formed JSON but semantically invalid.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace specleak

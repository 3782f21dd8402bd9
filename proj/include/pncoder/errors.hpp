#pragma once

#include <stdexcept>
#include <string>

namespace pncoder {

/// Base class for all pncoder errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &message) : std::runtime_error(message) {}
};

/// Malformed input text (config files, documents, CSV, model output).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Structurally valid input that violates a domain invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Filesystem failure (missing file, unwritable path).
class IoError : public Error {
public:
  using Error::Error;
};

/// Stage argument outside {1,2,3}.
class InvalidStageError : public Error {
public:
  using Error::Error;
};

/// Document with zero sentences where at least one is required.
class EmptyDocumentError : public Error {
public:
  using Error::Error;
};

/// Matrices that do not refer to the same sentence/code grid.
class AlignmentError : public Error {
public:
  using Error::Error;
};

/// Bad CLI/config values (unknown flag combinations, missing credentials).
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace pncoder

// Exception types shared by the library and the CLI.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace melcomp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad MIDI bytes, malformed filename infix, bad archive.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Two notes sound at the same time.
class PolyphonicInput : public Error {
 public:
  using Error::Error;
};

/// Pitch contour requested for a phrase without a single sounding note.
class ContourUndefined : public Error {
 public:
  using Error::Error;
};

/// The backtracking search ran out of alternatives at the root.
class SearchExhausted : public Error {
 public:
  using Error::Error;
};

/// Transition query with a symbol that is not part of the model alphabet.
class ModelQueryError : public Error {
 public:
  using Error::Error;
};

/// A model file does not match the expected layout. `path()` is a JSON
/// pointer to the offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace melcomp

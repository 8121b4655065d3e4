#pragma once

#include <stdexcept>
#include <string>

namespace dnslsh {

/// Malformed or unusable input data (bad CSV rows, unreadable captures,
/// unknown labels). Maps to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

/// A required CSV column is missing or the header is unusable.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// A CSV row failed validation. Processing stops at the first bad row.
class RowError : public DataError {
 public:
  RowError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A persisted artifact could not be decoded.
class CorruptFileError : public DataError {
 public:
  using DataError::DataError;
};

/// Artifacts produced under different featurization settings, or a model
/// file written by an incompatible format version. Maps to exit code 4.
class MetadataMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatVersionError : public MetadataMismatch {
 public:
  FormatVersionError(int found, int supported)
      : MetadataMismatch("unsupported format version " + std::to_string(found) +
                         " (this build reads version " + std::to_string(supported) + ")"),
        found_(found),
        supported_(supported) {}
  int found() const noexcept { return found_; }
  int supported() const noexcept { return supported_; }

 private:
  int found_;
  int supported_;
};

}  // namespace dnslsh

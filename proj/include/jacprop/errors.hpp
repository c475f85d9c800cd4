#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jacprop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A head or head-only activation used where it is not allowed.
class InvalidHeadError : public Error {
 public:
  using Error::Error;
};

class InvalidTargetError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// The dense reference path refuses networks above its parameter cap.
class ReferenceTooLargeError : public Error {
 public:
  using Error::Error;
};

/// The function handed to a finite-difference oracle returned a non-finite value.
class OracleFailureError : public Error {
 public:
  using Error::Error;
};

/// Malformed model container or matrix text file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid training configuration; the message names the file and field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, const std::string& field, const std::string& what)
      : Error(source + ": " + field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Malformed IDX input; carries the byte offset where parsing failed.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& path, std::uint64_t offset, const std::string& what)
      : Error(path + " @ byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Training aborted (non-finite loss, failed pre-training gradient check).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace jacprop

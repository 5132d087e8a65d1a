// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace unifault {

/// Broad failure class. The CLI maps these onto exit codes 2, 3 and 4.
enum class ErrorKind { config, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define UNIFAULT_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  }

UNIFAULT_DEFINE_ERROR(ConfigError, config);
UNIFAULT_DEFINE_ERROR(DataError, data);
UNIFAULT_DEFINE_ERROR(IoError, data);
UNIFAULT_DEFINE_ERROR(ManifestParseError, data);
UNIFAULT_DEFINE_ERROR(SignalFormatError, data);
UNIFAULT_DEFINE_ERROR(InvalidInputError, data);
UNIFAULT_DEFINE_ERROR(MissingStatsError, data);
UNIFAULT_DEFINE_ERROR(InvalidPairError, data);
UNIFAULT_DEFINE_ERROR(ShapeError, data);
UNIFAULT_DEFINE_ERROR(CheckpointFormatError, data);
UNIFAULT_DEFINE_ERROR(CheckpointTruncatedError, data);
UNIFAULT_DEFINE_ERROR(ConfigMismatchError, config);
UNIFAULT_DEFINE_ERROR(DegenerateTaskError, data);
UNIFAULT_DEFINE_ERROR(EvaluationError, data);
UNIFAULT_DEFINE_ERROR(NumericError, numeric);
UNIFAULT_DEFINE_ERROR(NumericInputError, numeric);
UNIFAULT_DEFINE_ERROR(DegenerateBatchError, numeric);

#undef UNIFAULT_DEFINE_ERROR

}  // namespace unifault

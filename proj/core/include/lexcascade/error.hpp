#pragma once

#include <stdexcept>
#include <string>

namespace lexcascade {

/// Process exit codes used by the command line tool.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kInvariant = 3,
};

/// Base class of every error raised by the library. Each concrete error maps
/// onto one of the tool's exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  virtual ExitCode exit_code() const noexcept { return ExitCode::kData; }
  virtual const char* kind() const noexcept = 0;
};

#define LEXCASCADE_DEFINE_ERROR(Name, Code)                                \
  class Name : public Error {                                              \
   public:                                                                 \
    using Error::Error;                                                    \
    ExitCode exit_code() const noexcept override { return ExitCode::Code; } \
    const char* kind() const noexcept override { return #Name; }           \
  }

LEXCASCADE_DEFINE_ERROR(IoError, kData);
LEXCASCADE_DEFINE_ERROR(MalformedFile, kData);
LEXCASCADE_DEFINE_ERROR(InvariantViolation, kData);
LEXCASCADE_DEFINE_ERROR(ShapeMismatch, kData);
LEXCASCADE_DEFINE_ERROR(NoFeasibleWord, kData);
LEXCASCADE_DEFINE_ERROR(MissingPosteriorgram, kData);
LEXCASCADE_DEFINE_ERROR(MissingReference, kData);
LEXCASCADE_DEFINE_ERROR(WordSetMismatch, kData);
LEXCASCADE_DEFINE_ERROR(UnknownCharacter, kData);
LEXCASCADE_DEFINE_ERROR(ConfigInvalid, kUsage);
LEXCASCADE_DEFINE_ERROR(TargetUnreachable, kData);
LEXCASCADE_DEFINE_ERROR(EmptyResult, kData);
LEXCASCADE_DEFINE_ERROR(AuditFailure, kInvariant);

#undef LEXCASCADE_DEFINE_ERROR

}  // namespace lexcascade

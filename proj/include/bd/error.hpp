#pragma once

#include <stdexcept>
#include <string>

namespace bd {

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kMissingInput,
  kCorruptArtifact,
  kGenerationFailure,
  kBindFailure,
  kInsufficientData,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingInput: return 2;
    case ErrorKind::kCorruptArtifact: return 3;
    case ErrorKind::kGenerationFailure: return 4;
    case ErrorKind::kBindFailure: return 5;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInsufficientData: return 1;
  }
  return 1;
}

}  // namespace bd

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgi {

enum class ErrorCode {
  kInvalidConcept,
  kParse,
  kSchema,
  kOutOfVocabulary,
  kCannotCorrupt,
  kTrainingDiverged,
  kUnparseableIntent,
  kCorruptionInfeasible,
  kEmptyUtterance,
  kTagVocabulary,
  kConfiguration,
  kCalibrationFailed,
  kIo,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure tied to a 1-based line number of the input stream.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised by the trainers when the loss stops being finite.
class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(std::size_t epoch)
      : Error(ErrorCode::kTrainingDiverged,
              "training diverged (non-finite loss) at epoch " +
                  std::to_string(epoch)),
        epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace kgi

#include "kgi/error.hpp"

namespace kgi {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConcept: return "invalid-concept";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kOutOfVocabulary: return "out-of-vocabulary";
    case ErrorCode::kCannotCorrupt: return "cannot-corrupt";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kUnparseableIntent: return "unparseable-intent";
    case ErrorCode::kCorruptionInfeasible: return "corruption-infeasible";
    case ErrorCode::kEmptyUtterance: return "empty-utterance";
    case ErrorCode::kTagVocabulary: return "tag-vocabulary";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kCalibrationFailed: return "calibration-failed";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace kgi

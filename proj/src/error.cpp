#include "coldstart/error.hpp"

namespace coldstart {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kLookup: return "lookup";
    case ErrorCategory::kArgument: return "argument";
    case ErrorCategory::kConflict: return "conflict";
    case ErrorCategory::kDivergence: return "divergence";
    case ErrorCategory::kTraining: return "training";
    case ErrorCategory::kEvaluation: return "evaluation";
  }
  return "unknown";
}

}  // namespace coldstart

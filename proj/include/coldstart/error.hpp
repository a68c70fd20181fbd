/**
 * @file error.hpp
 * @brief Exception hierarchy shared by all pipeline stages
 */

#pragma once

#include <stdexcept>
#include <string>

namespace coldstart {

/// Broad failure category; the CLI maps it to an exit status.
enum class ErrorCategory {
  kIo,
  kFormat,
  kConfig,
  kLookup,
  kArgument,
  kConflict,
  kDivergence,
  kTraining,
  kEvaluation,
};

const char* to_string(ErrorCategory category);

/**
 * @brief Base class for every error raised by the library
 *
 * The message is prefixed with the originating module, e.g.
 * "catalog: cannot open 'x.csv'".
 */
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& module, const std::string& message)
      : std::runtime_error(module + ": " + message), category_(category), module_(module) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCategory category_;
  std::string module_;
};

#define COLDSTART_DEFINE_ERROR(Name, Category)                        \
  class Name : public Error {                                         \
   public:                                                            \
    Name(const std::string& module, const std::string& message)       \
        : Error(ErrorCategory::Category, module, message) {}          \
  };

COLDSTART_DEFINE_ERROR(IoError, kIo)
COLDSTART_DEFINE_ERROR(FormatError, kFormat)
COLDSTART_DEFINE_ERROR(ConfigError, kConfig)
COLDSTART_DEFINE_ERROR(LookupError, kLookup)
COLDSTART_DEFINE_ERROR(ArgumentError, kArgument)
COLDSTART_DEFINE_ERROR(ConflictError, kConflict)
COLDSTART_DEFINE_ERROR(DivergenceError, kDivergence)
COLDSTART_DEFINE_ERROR(TrainingError, kTraining)
COLDSTART_DEFINE_ERROR(EvaluationError, kEvaluation)

#undef COLDSTART_DEFINE_ERROR

}  // namespace coldstart

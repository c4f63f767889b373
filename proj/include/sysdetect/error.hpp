#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sysdetect {

enum class ErrorCode {
  // strace summary grammar
  EmptyInput,
  MalformedHeader,
  MissingTotalRow,
  BadFieldType,
  DuplicateSyscall,
  // corpus
  BadHeader,
  UnknownCategory,
  DuplicatePath,
  EmptyManifest,
  AllFilesFailed,
  DegenerateFraction,
  Io,
  // features
  EmptyCorpus,
  BadMatrix,
  // classifiers
  SingleClassTraining,
  DimensionMismatch,
  KTooLarge,
  NonFiniteLoss,
  UnsupportedFamily,
  BadConfig,
  BadModel,
  // model selection
  KOutOfRange,
  FoldMissingClass,
  AllConfigsFailed,
  GridMismatch,
  // metrics
  LengthMismatch,
  UnknownLabel,
  NotBinary,
  EmptyMatrix,
  // analysis
  MissingGroup,
  // extraction
  ScriptIncomplete,
  BadScript,
};

std::string_view to_string(ErrorCode code);

/// True for codes that describe malformed input documents rather than
/// failures of the data or experiment itself.
bool is_parse_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace sysdetect

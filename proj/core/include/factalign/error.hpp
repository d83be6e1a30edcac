#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace factalign {

enum class ErrorCode {
  kEmptyChecklist,
  kInvalidWeights,
  kMissingComponent,
  kMissingBinding,
  kJudgeUnavailable,
  kMalformedJudgeOutput,
  kEmptyCorpus,
  kInsufficientClasses,
  kGroupTooSmall,
  kEmptySequence,
  kNoFacts,
  kEmptyJudgments,
  kInvalidArgument,
  kInvalidConfig,
  kIo,
  kInternal,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported as Error. `context` carries the id of the
// item that failed (query id, claim id, request id, ...) when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string context = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }
  const std::string& message() const noexcept { return message_; }

  // Same error with `context` prepended as "context/existing".
  Error with_context(std::string context) const;

 private:
  ErrorCode code_;
  std::string message_;
  std::string context_;
};

}  // namespace factalign

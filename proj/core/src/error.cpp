#include "factalign/error.hpp"

#include <utility>

namespace factalign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyChecklist: return "EmptyChecklist";
    case ErrorCode::kInvalidWeights: return "InvalidWeights";
    case ErrorCode::kMissingComponent: return "MissingComponent";
    case ErrorCode::kMissingBinding: return "MissingBinding";
    case ErrorCode::kJudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::kMalformedJudgeOutput: return "MalformedJudgeOutput";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInsufficientClasses: return "InsufficientClasses";
    case ErrorCode::kGroupTooSmall: return "GroupTooSmall";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kNoFacts: return "NoFacts";
    case ErrorCode::kEmptyJudgments: return "EmptyJudgments";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message,
                    const std::string& context) {
  std::string out(to_string(code));
  if (!context.empty()) out += " [" + context + "]";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string context)
    : std::runtime_error(compose(code, message, context)),
      code_(code),
      message_(message),
      context_(std::move(context)) {}

Error Error::with_context(std::string context) const {
  if (!context_.empty()) context += "/" + context_;
  return Error(code_, message_, std::move(context));
}

}  // namespace factalign

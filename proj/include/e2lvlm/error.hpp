#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace e2lvlm {

enum class ErrorCode {
  // manifest / corpus
  MalformedLine,
  DuplicateId,
  MissingField,
  EmbeddingDimMismatch,
  EmptyCorpus,
  IoFailure,
  // similarity
  DimMismatch,
  ZeroVector,
  EmptyItems,
  KOutOfRange,
  // client
  Timeout,
  HttpStatus,
  MalformedResponse,
  RetriesExhausted,
  EmptyInput,
  DimInconsistent,
  // prompts
  EmptyEvidence,
  UnresolvedPlaceholder,
  Unparseable,
  OutOfRange,
  NoVerdict,
  // pipeline
  MissingEmbeddings,
  EmptyRewrite,
  EmptyExplanation,
  UnlabeledSample,
  FailureThresholdExceeded,
  Interrupted,
  JournalMismatch,
  // evaluate / config
  EmptyPredictions,
  InvalidConfig,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::EmbeddingDimMismatch: return "EmbeddingDimMismatch";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyItems: return "EmptyItems";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::HttpStatus: return "HttpStatus";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::RetriesExhausted: return "RetriesExhausted";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimInconsistent: return "DimInconsistent";
    case ErrorCode::EmptyEvidence: return "EmptyEvidence";
    case ErrorCode::UnresolvedPlaceholder: return "UnresolvedPlaceholder";
    case ErrorCode::Unparseable: return "Unparseable";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoVerdict: return "NoVerdict";
    case ErrorCode::MissingEmbeddings: return "MissingEmbeddings";
    case ErrorCode::EmptyRewrite: return "EmptyRewrite";
    case ErrorCode::EmptyExplanation: return "EmptyExplanation";
    case ErrorCode::UnlabeledSample: return "UnlabeledSample";
    case ErrorCode::FailureThresholdExceeded: return "FailureThresholdExceeded";
    case ErrorCode::Interrupted: return "Interrupted";
    case ErrorCode::JournalMismatch: return "JournalMismatch";
    case ErrorCode::EmptyPredictions: return "EmptyPredictions";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Single exception type for the whole library. `code()` identifies the
/// failure kind; `notes()` carries secondary issues for aggregate errors
/// (e.g. every bad line of a manifest).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  Error(ErrorCode code, std::string message, std::vector<std::string> notes)
      : Error(code, std::move(message)) {
    notes_ = std::move(notes);
  }

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }

 private:
  ErrorCode code_;
  std::vector<std::string> notes_;
};

}  // namespace e2lvlm

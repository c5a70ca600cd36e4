#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reviewlens {

// Every failure the library reports. `subject` carries the offending field,
// id, JSON pointer, stage name or HTTP status, depending on the code.
enum class Errc {
  // corpus_model
  DanglingReference,
  InvariantViolation,
  SchemaError,
  // ingest
  HttpError,
  AuthError,
  RetryExhausted,
  MissingAspect,
  ScoreParseError,
  Unsegmentable,
  // stratify
  EmptyScores,
  DegenerateSample,
  TooFewSamples,
  NotEnoughMinima,
  TooFewPapers,
  // similarity
  DimensionMismatch,
  ZeroVector,
  ModelTagMismatch,
  UnknownTier,
  // kgraph
  DanglingMention,
  // report
  ZeroBaseline,
  MissingBaseline,
  // pipeline
  ConfigError,
  StageFailure,
  Io,
};

constexpr std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::SchemaError: return "SchemaError";
    case Errc::HttpError: return "HttpError";
    case Errc::AuthError: return "AuthError";
    case Errc::RetryExhausted: return "RetryExhausted";
    case Errc::MissingAspect: return "MissingAspect";
    case Errc::ScoreParseError: return "ScoreParseError";
    case Errc::Unsegmentable: return "Unsegmentable";
    case Errc::EmptyScores: return "EmptyScores";
    case Errc::DegenerateSample: return "DegenerateSample";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NotEnoughMinima: return "NotEnoughMinima";
    case Errc::TooFewPapers: return "TooFewPapers";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::ModelTagMismatch: return "ModelTagMismatch";
    case Errc::UnknownTier: return "UnknownTier";
    case Errc::DanglingMention: return "DanglingMention";
    case Errc::ZeroBaseline: return "ZeroBaseline";
    case Errc::MissingBaseline: return "MissingBaseline";
    case Errc::ConfigError: return "ConfigError";
    case Errc::StageFailure: return "StageFailure";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string subject, const std::string& detail = {})
      : std::runtime_error(compose(code, subject, detail)),
        code_(code),
        subject_(std::move(subject)) {}

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  static std::string compose(Errc code, const std::string& subject,
                             const std::string& detail) {
    std::string msg(errc_name(code));
    msg += "(" + subject + ")";
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  Errc code_;
  std::string subject_;
};

}  // namespace reviewlens

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace antiphish {

enum class Errc {
  // textmetrics
  ZeroVariance,
  LengthMismatch,
  TooFewSamples,
  NonFiniteInput,
  // urlkit
  MalformedUrl,
  // domkit
  EmptyDocument,
  // evidence
  FetchTimeout,
  RendererUnavailable,
  HttpError,
  WhoisUnavailable,
  NoRecord,
  RankServiceUnavailable,
  QuotaExceeded,
  ReputationServiceUnavailable,
  StoreCorrupt,
  NotRecorded,
  NetworkDisabled,
  // featurizer
  MissingSnapshot,
  AlreadyNormalized,
  // lrmodel
  SchemaMismatch,
  EmptyDataset,
  SingleClassDataset,
  DivergenceDetected,
  // evalkit
  MalformedCsv,
  UnlabeledRow,
  SchemaVersionMismatch,
  TooSmall,
  // synthcorpus
  InvalidMix,
  // shared
  InvalidArgument,
  Io,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::MalformedUrl: return "MalformedUrl";
    case Errc::EmptyDocument: return "EmptyDocument";
    case Errc::FetchTimeout: return "FetchTimeout";
    case Errc::RendererUnavailable: return "RendererUnavailable";
    case Errc::HttpError: return "HttpError";
    case Errc::WhoisUnavailable: return "WhoisUnavailable";
    case Errc::NoRecord: return "NoRecord";
    case Errc::RankServiceUnavailable: return "RankServiceUnavailable";
    case Errc::QuotaExceeded: return "QuotaExceeded";
    case Errc::ReputationServiceUnavailable: return "ReputationServiceUnavailable";
    case Errc::StoreCorrupt: return "StoreCorrupt";
    case Errc::NotRecorded: return "NotRecorded";
    case Errc::NetworkDisabled: return "NetworkDisabled";
    case Errc::MissingSnapshot: return "MissingSnapshot";
    case Errc::AlreadyNormalized: return "AlreadyNormalized";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::SingleClassDataset: return "SingleClassDataset";
    case Errc::DivergenceDetected: return "DivergenceDetected";
    case Errc::MalformedCsv: return "MalformedCsv";
    case Errc::UnlabeledRow: return "UnlabeledRow";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::TooSmall: return "TooSmall";
    case Errc::InvalidMix: return "InvalidMix";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// True for failures of an external service (network, renderer, quota).
constexpr bool is_service_error(Errc code) {
  switch (code) {
    case Errc::FetchTimeout:
    case Errc::RendererUnavailable:
    case Errc::HttpError:
    case Errc::WhoisUnavailable:
    case Errc::RankServiceUnavailable:
    case Errc::QuotaExceeded:
    case Errc::ReputationServiceUnavailable:
      return true;
    default:
      return false;
  }
}

/// Library-wide exception. Carries the originating module so the CLI can
/// report where a failure came from.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string_view module, const std::string& detail)
      : std::runtime_error(std::string(module) + ": " + std::string(errc_name(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code),
        module_(module),
        detail_(detail) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }
  [[nodiscard]] const std::string& module() const noexcept { return module_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string module_;
  std::string detail_;
};

}  // namespace antiphish

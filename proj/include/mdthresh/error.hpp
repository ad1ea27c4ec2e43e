#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdthresh {

enum class Errc {
  CrossLayerColorMismatch,
  SelfLoop,
  DuplicateEdge,
  UnknownNode,
  NoEdgesInScope,
  NotTwoLayers,
  MeanDegreeTooLarge,
  WiringFailed,
  DomainError,
  KappaAtMostOne,
  EmptyColor,
  ExponentSingularity,
  NonConvergence,
  LengthMismatch,
  ZeroGcc,
  ParseError,
  ConfigError,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::CrossLayerColorMismatch: return "CrossLayerColorMismatch";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::NoEdgesInScope: return "NoEdgesInScope";
    case Errc::NotTwoLayers: return "NotTwoLayers";
    case Errc::MeanDegreeTooLarge: return "MeanDegreeTooLarge";
    case Errc::WiringFailed: return "WiringFailed";
    case Errc::DomainError: return "DomainError";
    case Errc::KappaAtMostOne: return "KappaAtMostOne";
    case Errc::EmptyColor: return "EmptyColor";
    case Errc::ExponentSingularity: return "ExponentSingularity";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroGcc: return "ZeroGcc";
    case Errc::ParseError: return "ParseError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Process exit status for a failure of the given kind: 2 for configuration
/// problems, 3 for bad input data, 4 for numerical failures.
constexpr int exit_code(Errc code) noexcept {
  switch (code) {
    case Errc::ConfigError:
    case Errc::DomainError:
    case Errc::LengthMismatch:
      return 2;
    case Errc::WiringFailed:
    case Errc::KappaAtMostOne:
    case Errc::ExponentSingularity:
    case Errc::NonConvergence:
      return 4;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mdthresh

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agentmend {

/// Every failure the library reports is an agentmend::Error carrying one of
/// these codes. Callers switch on code(); detail() holds the human-readable
/// subject (a file name, a field, a tool name).
enum class Errc {
  // instance and corpus loading
  MissingFile,
  ManifestInvalid,
  ComponentUnknown,
  EmptyCorpus,
  CorpusMismatch,
  // model gateway
  TransportError,
  ProviderRefusal,
  MalformedToolCall,
  ScriptExhausted,
  // search
  EmptyQuery,
  QuotaExceeded,
  // rule generation
  EmptyOutput,
  PatternMismatch,
  // agents
  UnknownTool,
  StepBudgetExhausted,
  StoreEmpty,
  UnknownPattern,
  RuleMissing,
  EmptyCode,
  NoFixProduced,
  NoVerdict,
  // harness
  SandboxSetupError,
  GoldSanityFailed,
  // analytics
  LengthMismatch,
  EmptyInput,
  // general
  PreconditionViolation,
  ConfigInvalid,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace agentmend

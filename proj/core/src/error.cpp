#include "agentmend/error.hpp"

namespace agentmend {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::ManifestInvalid: return "ManifestInvalid";
    case Errc::ComponentUnknown: return "ComponentUnknown";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::CorpusMismatch: return "CorpusMismatch";
    case Errc::TransportError: return "TransportError";
    case Errc::ProviderRefusal: return "ProviderRefusal";
    case Errc::MalformedToolCall: return "MalformedToolCall";
    case Errc::ScriptExhausted: return "ScriptExhausted";
    case Errc::EmptyQuery: return "EmptyQuery";
    case Errc::QuotaExceeded: return "QuotaExceeded";
    case Errc::EmptyOutput: return "EmptyOutput";
    case Errc::PatternMismatch: return "PatternMismatch";
    case Errc::UnknownTool: return "UnknownTool";
    case Errc::StepBudgetExhausted: return "StepBudgetExhausted";
    case Errc::StoreEmpty: return "StoreEmpty";
    case Errc::UnknownPattern: return "UnknownPattern";
    case Errc::RuleMissing: return "RuleMissing";
    case Errc::EmptyCode: return "EmptyCode";
    case Errc::NoFixProduced: return "NoFixProduced";
    case Errc::NoVerdict: return "NoVerdict";
    case Errc::SandboxSetupError: return "SandboxSetupError";
    case Errc::GoldSanityFailed: return "GoldSanityFailed";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::PreconditionViolation: return "PreconditionViolation";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(Errc code, const std::string& detail) {
  std::string out(to_string(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

}  // namespace

Error::Error(Errc code, std::string detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)) {}

}  // namespace agentmend

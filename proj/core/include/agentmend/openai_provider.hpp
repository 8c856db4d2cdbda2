#pragma once

#include <nlohmann/json.hpp>

#include "agentmend/llm.hpp"

namespace agentmend {

/// Chat-completions wire protocol with function tools, as spoken by OpenAI,
/// OpenRouter and compatible gateways. The endpoint is the API base
/// (e.g. https://openrouter.ai/api/v1); requests go to <base>/chat/completions
/// with a bearer key read from ProviderConfig::credentials_env.
class OpenAiChatProvider final : public ChatProvider {
 public:
  ProviderReply complete(const ProviderConfig& config, std::span<const ChatTurn> history,
                         std::span<const ToolSchema> tools) override;
};

nlohmann::json build_chat_request(const ProviderConfig& config, std::span<const ChatTurn> history,
                                  std::span<const ToolSchema> tools);
ProviderReply parse_chat_response(const nlohmann::json& body);

}  // namespace agentmend

#include "agentmend/openai_provider.hpp"

#include <cstdlib>

#include "agentmend/error.hpp"
#include "agentmend/http.hpp"

namespace agentmend {

nlohmann::json build_chat_request(const ProviderConfig& config, std::span<const ChatTurn> history,
                                  std::span<const ToolSchema> tools) {
  auto messages = nlohmann::json::array();
  for (const auto& turn : history) {
    nlohmann::json m{{"role", to_string(turn.role)}, {"content", turn.content}};
    if (turn.role == Role::Tool && turn.tool_call_id) m["tool_call_id"] = *turn.tool_call_id;
    if (!turn.tool_calls.empty()) {
      auto calls = nlohmann::json::array();
      for (const auto& c : turn.tool_calls) {
        calls.push_back({{"id", c.call_id},
                         {"type", "function"},
                         {"function", {{"name", c.tool_name}, {"arguments", c.arguments.dump()}}}});
      }
      m["tool_calls"] = std::move(calls);
    }
    messages.push_back(std::move(m));
  }

  nlohmann::json request{{"model", config.model_name}, {"messages", std::move(messages)}};
  if (!tools.empty()) {
    auto list = nlohmann::json::array();
    for (const auto& t : tools) {
      list.push_back({{"type", "function"},
                      {"function",
                       {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters_json()}}}});
    }
    request["tools"] = std::move(list);
  }
  if (config.temperature) request["temperature"] = *config.temperature;
  return request;
}

ProviderReply parse_chat_response(const nlohmann::json& body) {
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    throw Error(Errc::ProviderRefusal, "response without choices");
  }
  const auto& message = body["choices"][0].at("message");
  ProviderReply reply;
  reply.turn.role = Role::Assistant;
  if (message.contains("content") && message["content"].is_string()) {
    reply.turn.content = message["content"].get<std::string>();
  }
  if (message.contains("tool_calls") && message["tool_calls"].is_array()) {
    for (const auto& call : message["tool_calls"]) {
      ToolCallRequest req;
      req.call_id = call.value("id", std::string{});
      const auto& fn = call.at("function");
      req.tool_name = fn.at("name").get<std::string>();
      req.arguments = parse_tool_arguments(fn.value("arguments", nlohmann::json("{}")), req.tool_name);
      reply.turn.tool_calls.push_back(std::move(req));
    }
  }
  if (body.contains("usage") && body["usage"].is_object()) {
    reply.input_tokens = body["usage"].value("prompt_tokens", std::uint64_t{0});
    reply.output_tokens = body["usage"].value("completion_tokens", std::uint64_t{0});
  }
  return reply;
}

ProviderReply OpenAiChatProvider::complete(const ProviderConfig& config, std::span<const ChatTurn> history,
                                           std::span<const ToolSchema> tools) {
  const auto base = http::parse_url(config.endpoint);
  http::Headers headers;
  if (!config.credentials_env.empty()) {
    const char* key = std::getenv(config.credentials_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(Errc::ConfigInvalid, "environment variable " + config.credentials_env + " is not set");
    }
    headers["Authorization"] = std::string("Bearer ") + key;
  }

  const auto response = http::post_json(base, "/chat/completions", headers,
                                        build_chat_request(config, history, tools).dump(),
                                        config.request_timeout);
  if (http::is_retryable_status(response.status)) {
    throw Error(Errc::TransportError, "HTTP " + std::to_string(response.status));
  }
  if (response.status != 200) {
    throw Error(Errc::ProviderRefusal, "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 500));
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(Errc::TransportError, "unparseable response body");
  }
  try {
    return parse_chat_response(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ProviderRefusal, std::string("unexpected response shape: ") + e.what());
  }
}

}  // namespace agentmend

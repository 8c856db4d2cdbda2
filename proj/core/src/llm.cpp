#include "agentmend/llm.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view name) noexcept {
  for (auto r : {Role::System, Role::User, Role::Assistant, Role::Tool}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

ChatTurn ChatTurn::system(std::string content) { return {Role::System, std::move(content), {}, {}}; }
ChatTurn ChatTurn::user(std::string content) { return {Role::User, std::move(content), {}, {}}; }
ChatTurn ChatTurn::assistant(std::string content, std::vector<ToolCallRequest> calls) {
  return {Role::Assistant, std::move(content), std::move(calls), {}};
}
ChatTurn ChatTurn::tool_result(std::string call_id, std::string content) {
  return {Role::Tool, std::move(content), {}, std::move(call_id)};
}

void to_json(nlohmann::json& j, const ToolCallRequest& call) {
  j = {{"id", call.call_id}, {"name", call.tool_name}, {"arguments", call.arguments}};
}

void from_json(const nlohmann::json& j, ToolCallRequest& call) {
  call.call_id = j.at("id").get<std::string>();
  call.tool_name = j.at("name").get<std::string>();
  call.arguments = j.value("arguments", nlohmann::json::object());
}

void to_json(nlohmann::json& j, const ChatTurn& turn) {
  j = {{"role", to_string(turn.role)}, {"content", turn.content}};
  if (!turn.tool_calls.empty()) j["tool_calls"] = turn.tool_calls;
  if (turn.tool_call_id) j["tool_call_id"] = *turn.tool_call_id;
}

void from_json(const nlohmann::json& j, ChatTurn& turn) {
  const auto role = parse_role(j.at("role").get<std::string>());
  if (!role) throw Error(Errc::ManifestInvalid, "unknown chat role " + j.at("role").dump());
  turn.role = *role;
  turn.content = j.value("content", std::string{});
  turn.tool_calls.clear();
  if (j.contains("tool_calls")) turn.tool_calls = j["tool_calls"].get<std::vector<ToolCallRequest>>();
  turn.tool_call_id.reset();
  if (j.contains("tool_call_id")) turn.tool_call_id = j["tool_call_id"].get<std::string>();
}

nlohmann::json ToolSchema::parameters_json() const {
  nlohmann::json props = nlohmann::json::object();
  auto required = nlohmann::json::array();
  for (const auto& p : params) {
    props[p.name] = {{"type", p.type}, {"description", p.description}};
    if (p.required) required.push_back(p.name);
  }
  return {{"type", "object"}, {"properties", props}, {"required", required}};
}

std::optional<std::string> session_violation(std::span<const ChatTurn> turns) {
  std::set<std::string> pending;
  std::set<std::string> seen_ids;
  for (const auto& turn : turns) {
    switch (turn.role) {
      case Role::Assistant:
        if (!pending.empty()) return "tool call " + *pending.begin() + " unanswered before next assistant turn";
        for (const auto& call : turn.tool_calls) {
          if (!seen_ids.insert(call.call_id).second) return "duplicate call id " + call.call_id;
          pending.insert(call.call_id);
        }
        break;
      case Role::Tool:
        if (!turn.tool_call_id) return "tool turn without tool_call_id";
        if (pending.erase(*turn.tool_call_id) == 0) return "tool result for unknown call " + *turn.tool_call_id;
        break;
      default:
        break;
    }
  }
  if (!pending.empty()) return "tool call " + *pending.begin() + " unanswered at end of session";
  return std::nullopt;
}

void write_turns_jsonl(std::ostream& out, std::span<const ChatTurn> turns) {
  for (const auto& t : turns) out << nlohmann::json(t).dump() << '\n';
}

std::vector<ChatTurn> read_turns_jsonl(std::istream& in) {
  std::vector<ChatTurn> turns;
  std::string line;
  while (std::getline(in, line)) {
    if (text::is_blank(line)) continue;
    turns.push_back(nlohmann::json::parse(line).get<ChatTurn>());
  }
  return turns;
}

void to_json(nlohmann::json& j, const UsageRecord& u) {
  j = {{"input_tokens", u.input_tokens},
       {"output_tokens", u.output_tokens},
       {"wall_time", u.wall_time},
       {"cost", u.cost}};
}

void from_json(const nlohmann::json& j, UsageRecord& u) {
  u.input_tokens = j.value("input_tokens", std::uint64_t{0});
  u.output_tokens = j.value("output_tokens", std::uint64_t{0});
  u.wall_time = j.value("wall_time", 0.0);
  u.cost = j.value("cost", 0.0);
  if (u.wall_time < 0 || u.cost < 0) throw Error(Errc::ManifestInvalid, "usage record with negative field");
}

SessionUsage aggregate_usage(std::span<const UsageRecord> records) {
  SessionUsage s;
  s.records = records.size();
  for (const auto& r : records) {
    s.input_tokens += r.input_tokens;
    s.output_tokens += r.output_tokens;
    s.wall_time += r.wall_time;
    s.cost += r.cost;
  }
  if (!records.empty()) {
    const auto n = static_cast<double>(records.size());
    s.mean = UsageMeans{static_cast<double>(s.input_tokens) / n,
                        static_cast<double>(s.output_tokens) / n, s.wall_time / n, s.cost / n};
  }
  return s;
}

void to_json(nlohmann::json& j, const SessionUsage& u) {
  j = {{"records", u.records},
       {"input_tokens", u.input_tokens},
       {"output_tokens", u.output_tokens},
       {"wall_time", u.wall_time},
       {"cost", u.cost}};
  if (u.mean) {
    j["mean"] = {{"input_tokens", u.mean->input_tokens},
                 {"output_tokens", u.mean->output_tokens},
                 {"wall_time", u.mean->wall_time},
                 {"cost", u.mean->cost}};
  } else {
    j["mean"] = nullptr;
  }
}

void from_json(const nlohmann::json& j, SessionUsage& u) {
  u.records = j.at("records").get<std::size_t>();
  u.input_tokens = j.at("input_tokens").get<std::uint64_t>();
  u.output_tokens = j.at("output_tokens").get<std::uint64_t>();
  u.wall_time = j.at("wall_time").get<double>();
  u.cost = j.at("cost").get<double>();
  u.mean.reset();
  if (j.contains("mean") && !j["mean"].is_null()) {
    const auto& m = j["mean"];
    u.mean = UsageMeans{m.at("input_tokens").get<double>(), m.at("output_tokens").get<double>(),
                        m.at("wall_time").get<double>(), m.at("cost").get<double>()};
  }
}

double compute_cost(std::uint64_t input_tokens, std::uint64_t output_tokens, const Pricing& p) noexcept {
  return static_cast<double>(input_tokens) * p.input + static_cast<double>(output_tokens) * p.output;
}

PricingTable PricingTable::from_json(const nlohmann::json& j) {
  PricingTable table;
  if (j.is_null()) return table;
  if (!j.is_object()) throw Error(Errc::ConfigInvalid, "pricing: expected an object");
  for (const auto& [model, entry] : j.items()) {
    const double in = entry.value("input_per_mtok", 0.0);
    const double out = entry.value("output_per_mtok", 0.0);
    if (in < 0 || out < 0) throw Error(Errc::ConfigInvalid, "pricing for " + model + " is negative");
    table.set(model, Pricing{in / 1e6, out / 1e6});
  }
  return table;
}

void PricingTable::set(std::string model, Pricing pricing) { prices_[std::move(model)] = pricing; }

std::optional<Pricing> PricingTable::lookup(const std::string& model) const {
  auto it = prices_.find(model);
  if (it == prices_.end()) return std::nullopt;
  return it->second;
}

void ProviderConfig::validate() const {
  if ((price_in && *price_in < 0) || (price_out && *price_out < 0)) {
    throw Error(Errc::ConfigInvalid, "provider " + provider_id + ": negative price");
  }
  if (!(request_timeout > 0)) throw Error(Errc::ConfigInvalid, "provider " + provider_id + ": timeout must be > 0");
  if (max_retries < 0) throw Error(Errc::ConfigInvalid, "provider " + provider_id + ": max_retries < 0");
}

void to_json(nlohmann::json& j, const ProviderConfig& c) {
  j = {{"provider_id", c.provider_id},
       {"model", c.model_name},
       {"endpoint", c.endpoint},
       {"api_key_env", c.credentials_env},
       {"timeout_s", c.request_timeout},
       {"max_retries", c.max_retries},
       {"initial_backoff_s", c.initial_backoff}};
  if (c.price_in) j["price_in_per_mtok"] = *c.price_in * 1e6;
  if (c.price_out) j["price_out_per_mtok"] = *c.price_out * 1e6;
  j["temperature"] = c.temperature ? nlohmann::json(*c.temperature) : nlohmann::json("provider default");
}

void from_json(const nlohmann::json& j, ProviderConfig& c) {
  if (!j.is_object()) throw Error(Errc::ConfigInvalid, "provider: expected an object");
  try {
    c.provider_id = j.value("provider_id", c.provider_id);
    c.model_name = j.value("model", c.model_name);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.credentials_env = j.value("api_key_env", c.credentials_env);
    c.request_timeout = j.value("timeout_s", c.request_timeout);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.initial_backoff = j.value("initial_backoff_s", c.initial_backoff);
    if (j.contains("price_in_per_mtok")) c.price_in = j["price_in_per_mtok"].get<double>() / 1e6;
    if (j.contains("price_out_per_mtok")) c.price_out = j["price_out_per_mtok"].get<double>() / 1e6;
    if (j.contains("temperature") && j["temperature"].is_number()) c.temperature = j["temperature"].get<double>();
  } catch (const nlohmann::json::type_error& e) {
    throw Error(Errc::ConfigInvalid, std::string("provider: ") + e.what());
  }
  c.validate();
}

Pricing resolve_pricing(const ProviderConfig& config, const PricingTable& table,
                        std::vector<std::string>* warnings) {
  if (config.price_in && config.price_out) return Pricing{*config.price_in, *config.price_out};
  if (auto p = table.lookup(config.model_name)) {
    return Pricing{config.price_in.value_or(p->input), config.price_out.value_or(p->output)};
  }
  const std::string msg = "no pricing for model '" + config.model_name + "'; cost recorded as 0";
  spdlog::warn("{}", msg);
  if (warnings) warnings->push_back(msg);
  return Pricing{config.price_in.value_or(0.0), config.price_out.value_or(0.0)};
}

// ---------------------------------------------------------------------------

void from_json(const nlohmann::json& j, ScriptedReply& r) {
  r = ScriptedReply{};
  if (j.contains("error")) {
    r.error = j["error"].get<std::string>();
    if (*r.error != "transport" && *r.error != "refusal") {
      throw Error(Errc::ConfigInvalid, "mock script: unknown error kind " + *r.error);
    }
    r.error_message = j.value("message", std::string{});
    return;
  }
  r.content = j.value("content", std::string{});
  if (j.contains("tool_calls")) r.tool_calls = j["tool_calls"];
  if (j.contains("usage")) {
    r.input_tokens = j["usage"].value("input_tokens", std::uint64_t{0});
    r.output_tokens = j["usage"].value("output_tokens", std::uint64_t{0});
  }
  r.latency = j.value("latency", 0.0);
}

void to_json(nlohmann::json& j, const ScriptedReply& r) {
  if (r.error) {
    j = {{"error", *r.error}, {"message", r.error_message}};
    return;
  }
  j = {{"content", r.content},
       {"tool_calls", r.tool_calls},
       {"usage", {{"input_tokens", r.input_tokens}, {"output_tokens", r.output_tokens}}},
       {"latency", r.latency}};
}

nlohmann::json parse_tool_arguments(const nlohmann::json& raw, const std::string& tool_name) {
  if (raw.is_null()) return nlohmann::json::object();
  if (raw.is_object()) return raw;
  if (raw.is_string()) {
    const auto& s = raw.get_ref<const std::string&>();
    if (text::is_blank(s)) return nlohmann::json::object();
    try {
      auto parsed = nlohmann::json::parse(s);
      if (parsed.is_object()) return parsed;
    } catch (const nlohmann::json::parse_error&) {
    }
  }
  throw Error(Errc::MalformedToolCall, tool_name + ": arguments are not a JSON object: " + raw.dump());
}

MockProvider::MockProvider(std::vector<ScriptedReply> script, std::shared_ptr<ManualClock> clock)
    : script_(script.begin(), script.end()), clock_(std::move(clock)) {}

std::vector<ScriptedReply> MockProvider::parse_script(const nlohmann::json& j) {
  const auto& list = j.is_object() && j.contains("replies") ? j["replies"] : j;
  if (!list.is_array()) throw Error(Errc::ConfigInvalid, "mock script: expected an array of replies");
  return list.get<std::vector<ScriptedReply>>();
}

std::vector<ScriptedReply> MockProvider::load_script(const std::filesystem::path& path) {
  try {
    return parse_script(nlohmann::json::parse(text::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigInvalid, path.string() + ": " + e.what());
  }
}

ProviderReply MockProvider::complete(const ProviderConfig&, std::span<const ChatTurn> history,
                                     std::span<const ToolSchema> tools) {
  std::lock_guard lock(mu_);
  requests_.emplace_back(history.begin(), history.end());
  auto& names = offered_.emplace_back();
  for (const auto& t : tools) names.push_back(t.name);

  if (script_.empty()) {
    throw Error(Errc::ScriptExhausted, "mock provider script exhausted after " +
                                           std::to_string(requests_.size() - 1) + " replies");
  }
  ScriptedReply reply = std::move(script_.front());
  script_.pop_front();

  if (reply.error) {
    const auto code = *reply.error == "transport" ? Errc::TransportError : Errc::ProviderRefusal;
    throw Error(code, reply.error_message.empty() ? "scripted failure" : reply.error_message);
  }
  if (clock_) clock_->advance(reply.latency);

  ProviderReply out;
  out.turn.role = Role::Assistant;
  out.turn.content = reply.content;
  out.input_tokens = reply.input_tokens;
  out.output_tokens = reply.output_tokens;
  for (const auto& call : reply.tool_calls) {
    ToolCallRequest req;
    req.tool_name = call.at("name").get<std::string>();
    req.call_id = call.contains("id") ? call["id"].get<std::string>()
                                      : "call_" + std::to_string(next_call_id_++);
    req.arguments = parse_tool_arguments(call.value("arguments", nlohmann::json::object()), req.tool_name);
    out.turn.tool_calls.push_back(std::move(req));
  }
  return out;
}

std::size_t MockProvider::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size();
}

std::vector<std::vector<ChatTurn>> MockProvider::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<std::vector<std::string>> MockProvider::offered_tools() const {
  std::lock_guard lock(mu_);
  return offered_;
}

// ---------------------------------------------------------------------------

ChatClient::ChatClient(ProviderConfig config, Pricing pricing, std::shared_ptr<ChatProvider> provider,
                       std::shared_ptr<Clock> clock, RateLimiter* limiter)
    : config_(std::move(config)),
      pricing_(pricing),
      provider_(std::move(provider)),
      clock_(clock ? std::move(clock) : steady_clock()),
      limiter_(limiter),
      sleeper_([](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); }) {
  if (!provider_) throw Error(Errc::ConfigInvalid, "chat client without provider");
  config_.validate();
}

ChatResult ChatClient::chat(std::span<const ChatTurn> history, std::span<const ToolSchema> tools) {
  if (history.empty()) throw Error(Errc::PreconditionViolation, "chat history is empty");
  std::set<std::string> names;
  for (const auto& t : tools) {
    if (!names.insert(t.name).second) throw Error(Errc::PreconditionViolation, "duplicate tool name " + t.name);
  }

  for (int attempt = 0;; ++attempt) {
    try {
      if (limiter_ && provider_->is_live()) limiter_->acquire();
      const double started = clock_->now();
      ProviderReply reply = provider_->complete(config_, history, tools);
      const double elapsed = clock_->now() - started;
      if (reply.turn.role != Role::Assistant) {
        throw Error(Errc::ProviderRefusal, "provider returned a non-assistant turn");
      }
      UsageRecord usage{reply.input_tokens, reply.output_tokens, std::max(0.0, elapsed),
                        compute_cost(reply.input_tokens, reply.output_tokens, pricing_)};
      return ChatResult{std::move(reply.turn), usage};
    } catch (const Error& e) {
      if (e.code() != Errc::TransportError) throw;
      if (attempt >= config_.max_retries) {
        throw Error(Errc::TransportError,
                    e.detail() + " (after " + std::to_string(attempt) + " retries)");
      }
      const double wait = config_.initial_backoff * static_cast<double>(1u << std::min(attempt, 16));
      spdlog::warn("transient provider failure ({}); retry {} in {:.1f}s", e.detail(), attempt + 1, wait);
      sleeper_(wait);
    }
  }
}

}  // namespace agentmend

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentmend/clock.hpp"

namespace agentmend {

// ---------------------------------------------------------------------------
// Dialogue types
// ---------------------------------------------------------------------------

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view name) noexcept;

struct ToolCallRequest {
  std::string call_id;
  std::string tool_name;
  nlohmann::json arguments = nlohmann::json::object();

  bool operator==(const ToolCallRequest&) const = default;
};

struct ChatTurn {
  Role role = Role::User;
  std::string content;
  std::vector<ToolCallRequest> tool_calls;
  std::optional<std::string> tool_call_id;

  static ChatTurn system(std::string content);
  static ChatTurn user(std::string content);
  static ChatTurn assistant(std::string content, std::vector<ToolCallRequest> calls = {});
  static ChatTurn tool_result(std::string call_id, std::string content);

  bool operator==(const ChatTurn&) const = default;
};

void to_json(nlohmann::json& j, const ToolCallRequest& call);
void from_json(const nlohmann::json& j, ToolCallRequest& call);
void to_json(nlohmann::json& j, const ChatTurn& turn);
void from_json(const nlohmann::json& j, ChatTurn& turn);

struct ToolParam {
  std::string name;
  std::string type;  // JSON-schema primitive: "string", "integer", ...
  std::string description;
  bool required = true;

  bool operator==(const ToolParam&) const = default;
};

struct ToolSchema {
  std::string name;
  std::string description;
  std::vector<ToolParam> params;

  /// JSON-schema object for the parameters.
  nlohmann::json parameters_json() const;
  bool operator==(const ToolSchema&) const = default;
};

/// Names a turn sequence's pairing problem, or nullopt when every assistant
/// tool call is answered by a tool turn with its id before the next
/// assistant turn.
std::optional<std::string> session_violation(std::span<const ChatTurn> turns);

/// One ChatTurn per line.
void write_turns_jsonl(std::ostream& out, std::span<const ChatTurn> turns);
std::vector<ChatTurn> read_turns_jsonl(std::istream& in);

// ---------------------------------------------------------------------------
// Usage and pricing
// ---------------------------------------------------------------------------

struct UsageRecord {
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  double wall_time = 0.0;  // seconds
  double cost = 0.0;       // USD

  bool operator==(const UsageRecord&) const = default;
};

void to_json(nlohmann::json& j, const UsageRecord& u);
void from_json(const nlohmann::json& j, UsageRecord& u);

struct UsageMeans {
  double input_tokens = 0;
  double output_tokens = 0;
  double wall_time = 0;
  double cost = 0;

  bool operator==(const UsageMeans&) const = default;
};

struct SessionUsage {
  std::size_t records = 0;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  double wall_time = 0;
  double cost = 0;
  std::optional<UsageMeans> mean;  // nullopt for zero records

  bool operator==(const SessionUsage&) const = default;
};

SessionUsage aggregate_usage(std::span<const UsageRecord> records);

void to_json(nlohmann::json& j, const SessionUsage& u);
void from_json(const nlohmann::json& j, SessionUsage& u);

/// USD per token.
struct Pricing {
  double input = 0.0;
  double output = 0.0;
};

double compute_cost(std::uint64_t input_tokens, std::uint64_t output_tokens, const Pricing& p) noexcept;

/// Model name -> pricing. JSON form: {"<model>": {"input_per_mtok": 3.0,
/// "output_per_mtok": 15.0}} with prices in USD per million tokens.
class PricingTable {
 public:
  static PricingTable from_json(const nlohmann::json& j);
  void set(std::string model, Pricing pricing);
  std::optional<Pricing> lookup(const std::string& model) const;

 private:
  std::map<std::string, Pricing> prices_;
};

struct ProviderConfig {
  std::string provider_id = "mock";
  std::string model_name = "scripted";
  std::string endpoint;
  std::string credentials_env;  // name of the environment variable with the key
  std::optional<double> price_in;   // USD per token
  std::optional<double> price_out;  // USD per token
  double request_timeout = 120.0;   // seconds
  int max_retries = 3;
  double initial_backoff = 1.0;  // seconds, doubled per retry
  std::optional<double> temperature;

  /// Throws Error(ConfigInvalid) on negative prices or non-positive timeout.
  void validate() const;
};

void to_json(nlohmann::json& j, const ProviderConfig& c);
/// Missing keys keep their defaults; prices are read per million tokens.
void from_json(const nlohmann::json& j, ProviderConfig& c);

/// Explicit prices on the config win, then the table. Unknown models get zero
/// prices and a warning.
Pricing resolve_pricing(const ProviderConfig& config, const PricingTable& table,
                        std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

struct ProviderReply {
  ChatTurn turn;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  /// Throws Error(TransportError) for retryable failures, ProviderRefusal for
  /// permanent ones, MalformedToolCall for unparseable tool arguments.
  virtual ProviderReply complete(const ProviderConfig& config, std::span<const ChatTurn> history,
                                 std::span<const ToolSchema> tools) = 0;

  /// Live providers go through the shared rate limiter.
  virtual bool is_live() const { return true; }
};

/// One canned reply. JSON form:
///   {"content": "...", "tool_calls": [{"id": "c1", "name": "t", "arguments": {...}}],
///    "usage": {"input_tokens": 10, "output_tokens": 5}, "latency": 1.5}
/// or {"error": "transport" | "refusal", "message": "..."} to fail one call.
/// A tool call whose "arguments" is a string is parsed as JSON; failure to
/// parse raises MalformedToolCall, as with a live provider.
struct ScriptedReply {
  std::string content;
  nlohmann::json tool_calls = nlohmann::json::array();
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  double latency = 0.0;
  std::optional<std::string> error;  // "transport" or "refusal"
  std::string error_message;
};

void from_json(const nlohmann::json& j, ScriptedReply& r);
void to_json(nlohmann::json& j, const ScriptedReply& r);

/// Replays an ordered script; each chat call consumes the next reply. Running
/// out of script is a hard error (ScriptExhausted).
class MockProvider final : public ChatProvider {
 public:
  explicit MockProvider(std::vector<ScriptedReply> script, std::shared_ptr<ManualClock> clock = nullptr);

  static std::vector<ScriptedReply> parse_script(const nlohmann::json& j);
  static std::vector<ScriptedReply> load_script(const std::filesystem::path& path);

  ProviderReply complete(const ProviderConfig& config, std::span<const ChatTurn> history,
                         std::span<const ToolSchema> tools) override;
  bool is_live() const override { return false; }

  std::size_t remaining() const;
  /// Histories received, in call order.
  std::vector<std::vector<ChatTurn>> requests() const;
  /// Tool names offered on each call.
  std::vector<std::vector<std::string>> offered_tools() const;

 private:
  mutable std::mutex mu_;
  std::deque<ScriptedReply> script_;
  std::shared_ptr<ManualClock> clock_;
  std::vector<std::vector<ChatTurn>> requests_;
  std::vector<std::vector<std::string>> offered_;
  std::size_t next_call_id_ = 1;
};

/// Parses a tool call's argument payload (object or JSON string).
nlohmann::json parse_tool_arguments(const nlohmann::json& raw, const std::string& tool_name);

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

struct ChatResult {
  ChatTurn turn;
  UsageRecord usage;
};

/// Binds a provider to a config, adds retries with exponential backoff,
/// rate limiting, timing and cost accounting.
class ChatClient {
 public:
  using Sleeper = std::function<void(double seconds)>;

  ChatClient(ProviderConfig config, Pricing pricing, std::shared_ptr<ChatProvider> provider,
             std::shared_ptr<Clock> clock = steady_clock(), RateLimiter* limiter = &shared_rate_limiter());

  /// Pre: history non-empty, tool names unique.
  ChatResult chat(std::span<const ChatTurn> history, std::span<const ToolSchema> tools);

  const ProviderConfig& config() const noexcept { return config_; }
  const Pricing& pricing() const noexcept { return pricing_; }
  Clock& clock() const noexcept { return *clock_; }
  ChatProvider& provider() const noexcept { return *provider_; }

  /// Replaces the backoff sleep (tests use a no-op).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

 private:
  ProviderConfig config_;
  Pricing pricing_;
  std::shared_ptr<ChatProvider> provider_;
  std::shared_ptr<Clock> clock_;
  RateLimiter* limiter_;
  Sleeper sleeper_;
};

}  // namespace agentmend

#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentos/types.hpp"

namespace agentos {

enum class EngineMode { direct, transformed };

std::string_view mode_name(EngineMode mode);
EngineMode parse_mode(std::string_view name);

struct Message {
    std::string role;  // system | user | assistant | tool
    std::string content;
    std::optional<ToolCall> tool_call;  // assistant messages in direct mode
    std::string tool_call_id;           // assistant call id / tool reply id

    bool operator==(const Message&) const = default;
};

struct CompletionRequest {
    std::string model;
    std::vector<Message> messages;
    std::vector<ToolSchema> tools;  // sent only in direct mode
    EngineMode mode = EngineMode::direct;
    // Routing hint for test doubles (usually the acting agent's name). Never sent
    // over the wire and not part of the request digest.
    std::string tag;
};

struct CompletionResponse {
    std::string content;
    std::optional<ToolCall> tool_call;

    bool operator==(const CompletionResponse&) const = default;
};

nlohmann::json response_to_json(const CompletionResponse& r);
CompletionResponse response_from_json(const nlohmann::json& j);

// Canonical JSON of (model, messages, tool schemas, mode).
nlohmann::json request_identity_json(const CompletionRequest& req);
// Lowercase hex SHA-256 of the canonical request JSON.
std::string request_digest(const CompletionRequest& req);

class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

struct ScriptStep {
    CompletionResponse response;
    std::optional<std::string> failure;  // simulated transport failure (E_BACKEND)

    static ScriptStep text(std::string content);
    static ScriptStep call(std::string tool, Arguments args = {}, std::string content = {});
    static ScriptStep fail(std::string message);
};

// Pops one step per request, in order, exactly once. Thread-safe.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptStep> steps = {});

    void push(ScriptStep step);
    CompletionResponse complete(const CompletionRequest& request) override;

    std::size_t remaining() const;
    std::size_t consumed() const;
    std::vector<CompletionRequest> requests() const;

    // Sleeps a pseudo-random 0..max_micros before answering; used to shuffle
    // completion order under concurrent execution.
    void set_jitter(std::uint32_t max_micros, std::uint64_t seed);

private:
    mutable std::mutex mutex_;
    std::deque<ScriptStep> steps_;
    std::vector<CompletionRequest> seen_;
    std::uint32_t jitter_max_ = 0;
    std::mt19937_64 rng_;
};

class FunctionBackend : public Backend {
public:
    using Handler = std::function<CompletionResponse(const CompletionRequest&)>;
    explicit FunctionBackend(Handler handler) : handler_(std::move(handler)) {}
    CompletionResponse complete(const CompletionRequest& request) override { return handler_(request); }

private:
    Handler handler_;
};

// Dispatches by request tag, then by model id, then to the fallback.
class RoutingBackend : public Backend {
public:
    void route(std::string tag, std::shared_ptr<Backend> backend);
    void route_model(std::string model, std::shared_ptr<Backend> backend);
    void set_fallback(std::shared_ptr<Backend> backend);

    CompletionResponse complete(const CompletionRequest& request) override;

    std::size_t calls(const std::string& tag) const;
    std::size_t total_calls() const;

private:
    std::map<std::string, std::shared_ptr<Backend>> by_tag_;
    std::map<std::string, std::shared_ptr<Backend>> by_model_;
    std::shared_ptr<Backend> fallback_;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> calls_;
};

// Builds a scripted backend from JSON:
//   {"default": [step...], "routes": {"<tag>": [step...]}, "models": {"<model>": [step...]}}
// where step is {"text": "..."} | {"call": {"name": "...", "arguments": {...}}, "text"?: "..."}
// | {"fail": "..."}. A bare array is shorthand for {"default": [...]}.
std::shared_ptr<Backend> scripted_backend_from_json(const nlohmann::json& spec);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
};

struct HttpConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;
    RetryPolicy retry;
    std::chrono::seconds timeout{120};
};

// POSTs JSON to base_url + suffix with bearer auth and the retry policy above.
nlohmann::json post_json(const HttpConfig& config, const std::string& suffix, const nlohmann::json& body);

nlohmann::json build_chat_request(const CompletionRequest& request);
CompletionResponse parse_chat_response(const nlohmann::json& body);

// OpenAI-compatible chat-completions client. Transport failures and HTTP >= 500 are
// retried with exponential backoff; other statuses fail immediately.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpConfig config);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    HttpConfig config_;
};

enum class CassetteMode { replay, record };

// Request-digest keyed transcript. The n-th request with a given digest replays the
// n-th record for that digest. Record mode forwards misses to `inner` and appends.
class CassetteBackend : public Backend {
public:
    CassetteBackend(std::filesystem::path path, CassetteMode mode, std::shared_ptr<Backend> inner = nullptr);

    CompletionResponse complete(const CompletionRequest& request) override;

    std::size_t record_count() const;
    std::size_t forwarded() const;

private:
    void load();
    void append(const std::string& digest, const std::string& blob);

    std::filesystem::path path_;
    CassetteMode mode_;
    std::shared_ptr<Backend> inner_;
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> records_;
    std::map<std::string, std::size_t> cursor_;
    std::size_t count_ = 0;
    std::size_t forwarded_ = 0;
};

}  // namespace agentos

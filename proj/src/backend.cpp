#include "agentos/backend.hpp"

#include <openssl/evp.h>

#include <iomanip>
#include <sstream>
#include <thread>

#include "agentos/error.hpp"

namespace agentos {

using nlohmann::json;

std::string_view mode_name(EngineMode mode) {
    return mode == EngineMode::direct ? "direct" : "transformed";
}

EngineMode parse_mode(std::string_view name) {
    if (name == "direct") return EngineMode::direct;
    if (name == "transformed") return EngineMode::transformed;
    throw Error(ErrorCode::config, "unknown engine mode '" + std::string(name) + "'");
}

json response_to_json(const CompletionResponse& r) {
    json j{{"content", r.content}};
    if (r.tool_call) j["tool_call"] = *r.tool_call;
    return j;
}

CompletionResponse response_from_json(const json& j) {
    CompletionResponse r;
    r.content = j.value("content", "");
    if (j.contains("tool_call") && !j.at("tool_call").is_null()) r.tool_call = j.at("tool_call").get<ToolCall>();
    return r;
}

json request_identity_json(const CompletionRequest& req) {
    json messages = json::array();
    for (const auto& m : req.messages) {
        json jm{{"role", m.role}, {"content", m.content}};
        if (m.tool_call) jm["tool_call"] = *m.tool_call;
        if (!m.tool_call_id.empty()) jm["tool_call_id"] = m.tool_call_id;
        messages.push_back(std::move(jm));
    }
    json tools = json::array();
    for (const auto& t : req.tools) tools.push_back(t);
    return json{{"model", req.model}, {"messages", messages}, {"tools", tools}, {"mode", mode_name(req.mode)}};
}

std::string request_digest(const CompletionRequest& req) {
    const std::string canonical = request_identity_json(req).dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(canonical.data(), canonical.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::backend, "sha256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

ScriptStep ScriptStep::text(std::string content) {
    return ScriptStep{CompletionResponse{std::move(content), std::nullopt}, std::nullopt};
}

ScriptStep ScriptStep::call(std::string tool, Arguments args, std::string content) {
    return ScriptStep{CompletionResponse{std::move(content), ToolCall{std::move(tool), std::move(args)}},
                      std::nullopt};
}

ScriptStep ScriptStep::fail(std::string message) {
    return ScriptStep{CompletionResponse{}, std::move(message)};
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptStep> steps)
    : steps_(steps.begin(), steps.end()), rng_(0) {}

void ScriptedBackend::push(ScriptStep step) {
    std::lock_guard lock(mutex_);
    steps_.push_back(std::move(step));
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
    ScriptStep step;
    std::uint32_t pause = 0;
    {
        std::lock_guard lock(mutex_);
        seen_.push_back(request);
        if (steps_.empty()) {
            throw Error(ErrorCode::script_exhausted,
                        "scripted backend has no step left (tag '" + request.tag + "')");
        }
        step = std::move(steps_.front());
        steps_.pop_front();
        if (jitter_max_ > 0) pause = static_cast<std::uint32_t>(rng_() % (jitter_max_ + 1));
    }
    if (pause) std::this_thread::sleep_for(std::chrono::microseconds(pause));
    if (step.failure) throw Error(ErrorCode::backend, *step.failure);
    return step.response;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return steps_.size();
}

std::size_t ScriptedBackend::consumed() const {
    std::lock_guard lock(mutex_);
    return seen_.size();
}

std::vector<CompletionRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return seen_;
}

void ScriptedBackend::set_jitter(std::uint32_t max_micros, std::uint64_t seed) {
    std::lock_guard lock(mutex_);
    jitter_max_ = max_micros;
    rng_.seed(seed);
}

void RoutingBackend::route(std::string tag, std::shared_ptr<Backend> backend) {
    by_tag_[std::move(tag)] = std::move(backend);
}

void RoutingBackend::route_model(std::string model, std::shared_ptr<Backend> backend) {
    by_model_[std::move(model)] = std::move(backend);
}

void RoutingBackend::set_fallback(std::shared_ptr<Backend> backend) { fallback_ = std::move(backend); }

CompletionResponse RoutingBackend::complete(const CompletionRequest& request) {
    {
        std::lock_guard lock(mutex_);
        ++calls_[request.tag];
    }
    if (auto it = by_tag_.find(request.tag); it != by_tag_.end()) return it->second->complete(request);
    if (auto it = by_model_.find(request.model); it != by_model_.end()) return it->second->complete(request);
    if (fallback_) return fallback_->complete(request);
    throw Error(ErrorCode::script_exhausted, "no route for tag '" + request.tag + "'");
}

std::size_t RoutingBackend::calls(const std::string& tag) const {
    std::lock_guard lock(mutex_);
    auto it = calls_.find(tag);
    return it == calls_.end() ? 0 : it->second;
}

std::size_t RoutingBackend::total_calls() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [_, c] : calls_) n += c;
    return n;
}

namespace {

ScriptStep step_from_json(const json& j) {
    if (j.is_string()) return ScriptStep::text(j.get<std::string>());
    if (j.contains("fail")) return ScriptStep::fail(j.at("fail").get<std::string>());
    if (j.contains("call")) {
        const auto& c = j.at("call");
        Arguments args;
        const json raw = c.value("arguments", json::object());
        for (const auto& [k, v] : raw.items()) {
            args[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        return ScriptStep::call(c.at("name").get<std::string>(), std::move(args), j.value("text", ""));
    }
    return ScriptStep::text(j.at("text").get<std::string>());
}

std::shared_ptr<ScriptedBackend> steps_from_json(const json& arr) {
    std::vector<ScriptStep> steps;
    for (const auto& s : arr) steps.push_back(step_from_json(s));
    return std::make_shared<ScriptedBackend>(std::move(steps));
}

}  // namespace

std::shared_ptr<Backend> scripted_backend_from_json(const json& spec) {
    if (spec.is_array()) return steps_from_json(spec);
    auto router = std::make_shared<RoutingBackend>();
    if (spec.contains("default")) router->set_fallback(steps_from_json(spec.at("default")));
    const json routes = spec.value("routes", json::object());
    for (const auto& [tag, steps] : routes.items()) {
        router->route(tag, steps_from_json(steps));
    }
    const json models = spec.value("models", json::object());
    for (const auto& [model, steps] : models.items()) {
        router->route_model(model, steps_from_json(steps));
    }
    return router;
}

}  // namespace agentos

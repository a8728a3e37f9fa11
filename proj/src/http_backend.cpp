#include <httplib.h>

#include <algorithm>
#include <thread>

#include "agentos/backend.hpp"
#include "agentos/error.hpp"

namespace agentos {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::config, "api base '" + url + "' has no scheme");
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

json encode_arguments(const Arguments& args) {
    json j = json::object();
    for (const auto& [k, v] : args) j[k] = v;
    return j;
}

}  // namespace

json build_chat_request(const CompletionRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        json jm{{"role", m.role}};
        if (m.role == "assistant" && m.tool_call) {
            jm["content"] = m.content.empty() ? json(nullptr) : json(m.content);
            jm["tool_calls"] = json::array({json{
                {"id", m.tool_call_id},
                {"type", "function"},
                {"function", {{"name", m.tool_call->tool_name},
                              {"arguments", encode_arguments(m.tool_call->arguments).dump()}}}}});
        } else {
            jm["content"] = m.content;
        }
        if (m.role == "tool") jm["tool_call_id"] = m.tool_call_id;
        messages.push_back(std::move(jm));
    }

    json body{{"model", request.model}, {"messages", std::move(messages)}};
    if (request.mode == EngineMode::direct && !request.tools.empty()) {
        json tools = json::array();
        for (const auto& t : request.tools) {
            json props = json::object();
            json required = json::array();
            for (const auto& p : t.parameters) {
                props[p.name] = {{"type", "string"}, {"description", p.description}};
                if (p.required) required.push_back(p.name);
            }
            tools.push_back({{"type", "function"},
                             {"function",
                              {{"name", t.name},
                               {"description", t.description},
                               {"parameters", {{"type", "object"}, {"properties", props}, {"required", required}}}}}});
        }
        body["tools"] = std::move(tools);
    }
    return body;
}

CompletionResponse parse_chat_response(const json& body) {
    const auto& choices = body.at("choices");
    if (!choices.is_array() || choices.empty()) throw Error(ErrorCode::backend, "response has no choices");
    const auto& msg = choices.at(0).at("message");

    CompletionResponse out;
    if (msg.contains("content") && msg.at("content").is_string()) out.content = msg.at("content").get<std::string>();
    if (msg.contains("tool_calls") && msg.at("tool_calls").is_array() && !msg.at("tool_calls").empty()) {
        const auto& fn = msg.at("tool_calls").at(0).at("function");
        ToolCall call;
        call.tool_name = fn.at("name").get<std::string>();
        const auto& raw = fn.at("arguments");
        json args = raw.is_string() ? json::parse(raw.get<std::string>(), nullptr, false) : raw;
        if (args.is_discarded()) throw Error(ErrorCode::backend, "tool call arguments are not JSON");
        if (args.is_object()) {
            for (const auto& [k, v] : args.items()) call.arguments[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        out.tool_call = std::move(call);
    }
    return out;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw Error(ErrorCode::config, "http backend needs an api base URL");
    if (config_.api_key.empty()) throw Error(ErrorCode::config, "http backend needs an api key");
    if (config_.retry.max_attempts < 1) config_.retry.max_attempts = 1;
}

json post_json(const HttpConfig& config, const std::string& suffix, const json& body) {
    if (config.base_url.empty()) throw Error(ErrorCode::config, "no api base URL configured");
    const ParsedUrl url = split_url(config.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(config.timeout);
    client.set_read_timeout(config.timeout);
    client.set_write_timeout(config.timeout);
    const httplib::Headers headers{{"Authorization", "Bearer " + config.api_key}};
    const std::string payload = body.dump();
    const std::string path = url.path + suffix;
    const int attempts = std::max(1, config.retry.max_attempts);

    std::string last_failure;
    auto backoff = config.retry.initial_backoff;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 500 || res->status == 429) {
            last_failure = "HTTP " + std::to_string(res->status);
        } else if (res->status >= 400) {
            throw Error(ErrorCode::backend, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
        } else {
            auto parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) throw Error(ErrorCode::backend, "response body is not JSON");
            return parsed;
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(ErrorCode::backend, last_failure + " after " + std::to_string(attempts) + " attempts");
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    const json body = post_json(config_, "/chat/completions", build_chat_request(request));
    try {
        return parse_chat_response(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::backend, std::string("malformed chat response: ") + e.what());
    }
}

}  // namespace agentos

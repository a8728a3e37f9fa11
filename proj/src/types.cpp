#include "agentos/types.hpp"

#include <algorithm>
#include <set>

#include "agentos/error.hpp"
#include "agentos/text.hpp"

namespace agentos {

using nlohmann::json;

ToolResult ToolResult::success(std::string payload) {
    return ToolResult{Status::ok, std::move(payload), std::nullopt};
}

ToolResult ToolResult::failure(std::string error_kind, std::string payload) {
    return ToolResult{Status::error, std::move(payload), std::move(error_kind)};
}

void ToolSchema::check() const {
    if (!is_identifier(name)) {
        throw Error(ErrorCode::invalid_def, "tool name '" + name + "' is not an identifier");
    }
    std::set<std::string> seen;
    for (const auto& p : parameters) {
        if (!is_identifier(p.name)) {
            throw Error(ErrorCode::invalid_def, "parameter name '" + p.name + "' is not an identifier");
        }
        if (!seen.insert(p.name).second) {
            throw Error(ErrorCode::invalid_def, "duplicate parameter '" + p.name + "' in tool " + name);
        }
    }
}

void AgentDefinition::check() const {
    if (name.empty()) throw Error(ErrorCode::invalid_def, "agent name is empty");
    if (std::find(transfer_targets.begin(), transfer_targets.end(), name) != transfer_targets.end()) {
        throw Error(ErrorCode::invalid_def, "agent '" + name + "' lists itself as a transfer target");
    }
}

bool Context::has_prefix(const Context& prior) const {
    if (prior.size() > size()) return false;
    return std::equal(prior.turns_.begin(), prior.turns_.end(), turns_.begin());
}

std::string author_label(const Author& a) {
    switch (a.kind) {
        case Author::Kind::user: return "user";
        case Author::Kind::agent: return "agent:" + a.name;
        case Author::Kind::tool: return "tool:" + a.name;
        case Author::Kind::system: return "system";
    }
    return "user";
}

void to_json(json& j, const ToolCall& c) {
    j = json{{"name", c.tool_name}, {"arguments", c.arguments}};
}

void from_json(const json& j, ToolCall& c) {
    c.tool_name = j.at("name").get<std::string>();
    c.arguments = j.value("arguments", Arguments{});
}

void to_json(json& j, const ToolResult& r) {
    j = json{{"status", r.ok() ? "ok" : "error"}, {"payload", r.payload}};
    if (r.error_kind) j["error_kind"] = *r.error_kind;
}

void from_json(const json& j, ToolResult& r) {
    r.status = j.at("status").get<std::string>() == "ok" ? ToolResult::Status::ok
                                                          : ToolResult::Status::error;
    r.payload = j.value("payload", "");
    if (j.contains("error_kind")) r.error_kind = j.at("error_kind").get<std::string>();
}

void to_json(json& j, const ToolSchema& s) {
    json params = json::array();
    for (const auto& p : s.parameters) {
        params.push_back({{"name", p.name}, {"description", p.description}, {"required", p.required}});
    }
    j = json{{"name", s.name}, {"description", s.description}, {"parameters", params}};
}

void from_json(const json& j, ToolSchema& s) {
    s.name = j.at("name").get<std::string>();
    s.description = j.value("description", "");
    s.parameters.clear();
    for (const auto& p : j.value("parameters", json::array())) {
        s.parameters.push_back({p.at("name").get<std::string>(), p.value("description", ""),
                                p.value("required", true)});
    }
}

void to_json(json& j, const Turn& t) {
    j = json{{"author", author_label(t.author)}, {"content", t.content}};
    if (t.tool_call) j["tool_call"] = *t.tool_call;
    if (t.observation) j["observation"] = *t.observation;
    if (t.note) j["note"] = *t.note;
}

json Context::to_json() const {
    json arr = json::array();
    for (const auto& t : turns_) arr.push_back(t);
    return arr;
}

void to_json(json& j, const AgentDefinition& a) {
    j = json{{"name", a.name},
             {"description", a.description},
             {"instructions", a.instructions},
             {"tool_names", a.tool_names},
             {"transfer_targets", a.transfer_targets},
             {"model", a.model}};
}

void from_json(const json& j, AgentDefinition& a) {
    a.name = j.at("name").get<std::string>();
    a.description = j.value("description", "");
    a.instructions = j.value("instructions", "");
    a.tool_names = j.value("tool_names", std::vector<std::string>{});
    a.transfer_targets = j.value("transfer_targets", std::vector<std::string>{});
    a.model = j.value("model", "");
}

}  // namespace agentos

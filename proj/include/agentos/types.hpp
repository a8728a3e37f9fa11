#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentos {

using Arguments = std::map<std::string, std::string>;

struct ToolCall {
    std::string tool_name;
    Arguments arguments;

    bool operator==(const ToolCall&) const = default;
};

struct ToolResult {
    enum class Status { ok, error };

    Status status = Status::ok;
    std::string payload;
    std::optional<std::string> error_kind;  // set iff status == error

    static ToolResult success(std::string payload);
    static ToolResult failure(std::string error_kind, std::string payload);

    bool ok() const noexcept { return status == Status::ok; }
    bool operator==(const ToolResult&) const = default;
};

struct ToolParameter {
    std::string name;
    std::string description;
    bool required = true;

    bool operator==(const ToolParameter&) const = default;
};

struct ToolSchema {
    std::string name;
    std::string description;
    std::vector<ToolParameter> parameters;

    // Throws E_INVALID_DEF on a bad name or duplicate parameter names.
    void check() const;
    bool operator==(const ToolSchema&) const = default;
};

struct Author {
    enum class Kind { user, agent, tool, system };

    Kind kind = Kind::user;
    std::string name;

    static Author user() { return {Kind::user, {}}; }
    static Author agent(std::string n) { return {Kind::agent, std::move(n)}; }
    static Author tool(std::string n) { return {Kind::tool, std::move(n)}; }
    static Author system() { return {Kind::system, {}}; }

    bool operator==(const Author&) const = default;
};

// One step of a conversation: an action and, when it was executed, its observation.
struct Turn {
    Author author;
    std::string content;
    std::optional<ToolCall> tool_call;
    std::optional<ToolResult> observation;
    // Runtime feedback for steps that produced no executable action (e.g. a malformed call).
    std::optional<std::string> note;

    bool operator==(const Turn&) const = default;
};

// Append-only turn history shared across agents in one conversation.
class Context {
public:
    Context() = default;

    void append(Turn turn) { turns_.push_back(std::move(turn)); }

    const std::vector<Turn>& turns() const noexcept { return turns_; }
    std::size_t size() const noexcept { return turns_.size(); }
    bool empty() const noexcept { return turns_.empty(); }
    const Turn& back() const { return turns_.back(); }

    bool has_prefix(const Context& prior) const;

    nlohmann::json to_json() const;
    std::string dump() const { return to_json().dump(); }

    bool operator==(const Context&) const = default;

private:
    std::vector<Turn> turns_;
};

struct AgentDefinition {
    std::string name;
    std::string description;
    std::string instructions;
    std::vector<std::string> tool_names;
    std::vector<std::string> transfer_targets;
    std::string model;

    // Throws E_INVALID_DEF when the name is empty or the agent targets itself.
    void check() const;
    bool operator==(const AgentDefinition&) const = default;
};

void to_json(nlohmann::json& j, const ToolCall& c);
void from_json(const nlohmann::json& j, ToolCall& c);
void to_json(nlohmann::json& j, const ToolResult& r);
void from_json(const nlohmann::json& j, ToolResult& r);
void to_json(nlohmann::json& j, const ToolSchema& s);
void from_json(const nlohmann::json& j, ToolSchema& s);
void to_json(nlohmann::json& j, const Turn& t);
void to_json(nlohmann::json& j, const AgentDefinition& a);
void from_json(const nlohmann::json& j, AgentDefinition& a);

std::string author_label(const Author& a);

}  // namespace agentos

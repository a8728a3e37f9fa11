#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agentos/error.hpp"

namespace agentos {

struct KeyDesc {
    std::string key;
    std::string description;
    bool operator==(const KeyDesc&) const = default;
};

struct GlobalVariable {
    std::string key;
    std::string description;
    std::string value;
    bool operator==(const GlobalVariable&) const = default;
};

struct ToolRef {
    std::string name;
    std::string description;
    bool operator==(const ToolRef&) const = default;
};

// ---- agent form ----

struct AgentSpec {
    std::string name;
    std::string description;
    std::string instructions;
    std::vector<ToolRef> tools_existing;
    std::vector<ToolRef> tools_new;
    // Lists so that a form with the wrong number of pairs still parses and can be
    // reported by the validator.
    std::vector<KeyDesc> agent_input;
    std::vector<KeyDesc> agent_output;
    bool operator==(const AgentSpec&) const = default;
};

struct AgentForm {
    std::string system_input;
    std::vector<KeyDesc> system_output;
    std::vector<GlobalVariable> global_variables;
    std::vector<AgentSpec> agents;
    bool operator==(const AgentForm&) const = default;
};

// ---- workflow form ----

enum class ActionType { result, abort, go_to };

std::string_view action_type_name(ActionType t);

struct Action {
    ActionType type = ActionType::result;
    std::string value;
    bool operator==(const Action&) const = default;
};

struct Output {
    std::string key;
    std::string description;
    std::optional<std::string> condition;
    Action action;
    bool operator==(const Output&) const = default;
};

struct EventAgent {
    std::string name;
    std::string model;
    bool operator==(const EventAgent&) const = default;
};

struct Event {
    std::string name;
    std::vector<KeyDesc> inputs;
    std::optional<std::string> task;
    std::vector<Output> outputs;
    std::vector<std::string> listen;
    std::optional<EventAgent> agent;
    bool operator==(const Event&) const = default;
};

struct WorkflowAgent {
    std::string name;
    std::string category;  // "existing" | "new"
    std::string description;
    std::optional<std::vector<ToolRef>> tools;
    bool operator==(const WorkflowAgent&) const = default;
};

struct WorkflowForm {
    std::string name;
    std::vector<KeyDesc> system_input;
    std::vector<KeyDesc> system_output;
    std::vector<WorkflowAgent> agents;
    std::vector<GlobalVariable> global_variables;
    std::vector<Event> events;
    bool operator==(const WorkflowForm&) const = default;

    const Event* find_event(std::string_view name) const;
    const WorkflowAgent* find_agent(std::string_view name) const;
};

inline constexpr std::string_view kStartEvent = "on_start";

// E_XML / E_SCHEMA / E_ACTION_TYPE raised while reading a form; path locates the
// offending element.
class FormError : public Error {
public:
    FormError(ErrorCode code, std::string path, const std::string& reason);
    const std::string& path() const noexcept { return path_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string path_;
    std::string reason_;
};

AgentForm parse_agent_form(std::string_view xml);
WorkflowForm parse_workflow_form(std::string_view xml);

std::string to_xml(const AgentForm& form);
std::string to_xml(const WorkflowForm& form);

// ---- validation ----

struct Diagnostic {
    std::string code;  // V1..V10, A1..A5, W1 (lint), E_XML / E_SCHEMA / E_ACTION_TYPE
    std::string message;
    std::string path;
    bool operator==(const Diagnostic&) const = default;
};

class RegistryView {
public:
    virtual ~RegistryView() = default;
    virtual bool has_tool(const std::string& name) const = 0;
    virtual bool has_agent(const std::string& name) const = 0;
    virtual bool has_workflow(const std::string& name) const = 0;
};

// In-memory view, mostly for tests.
struct NameSetView : RegistryView {
    std::set<std::string> tools, agents, workflows;
    bool has_tool(const std::string& n) const override { return tools.count(n) > 0; }
    bool has_agent(const std::string& n) const override { return agents.count(n) > 0; }
    bool has_workflow(const std::string& n) const override { return workflows.count(n) > 0; }
};

// A null registry skips every check that needs one (A3, V1 uniqueness, V8 lookups).
std::vector<Diagnostic> validate_agent_form(const AgentForm& form, const RegistryView* registry);
std::vector<Diagnostic> validate_workflow_form(const WorkflowForm& form, const RegistryView* registry);

// Non-fatal findings: W1 for a GOTO output that is the only output of its event.
std::vector<Diagnostic> lint_workflow_form(const WorkflowForm& form);

// ---- global variables ----

// Keys referenced as {key}; "{{" and "}}" are escapes, other braces are literal.
std::vector<std::string> placeholders(std::string_view text);

std::map<std::string, std::string> globals_map(const std::vector<GlobalVariable>& globals);

// Throws E_UNBOUND naming the first key without a binding.
std::string substitute_globals(std::string_view text, const std::map<std::string, std::string>& values);

}  // namespace agentos

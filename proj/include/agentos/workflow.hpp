#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agentos/engine.hpp"
#include "agentos/error.hpp"
#include "agentos/forms.hpp"
#include "agentos/kernel.hpp"
#include "agentos/trace.hpp"

namespace agentos {

struct EventGraph {
    WorkflowForm form;
    std::vector<std::string> nodes;                                // document order
    std::map<std::string, std::vector<std::string>> listen_edges;  // source -> listeners
    std::vector<std::pair<std::string, std::string>> goto_edges;   // (source, target)
    std::vector<std::string> topo_order;

    const Event& event(const std::string& name) const;
    // `from` plus every event reachable from it along listen edges.
    std::set<std::string> forward_closure(const std::string& from) const;
};

// Throws E_INVALID_FORM when the form fails registry-free validation.
EventGraph compile_graph(const WorkflowForm& form);

enum class EventStatus { pending, running, completed };

struct EventState {
    EventStatus status = EventStatus::pending;
    std::string output_key;              // completed: the selected output
    std::vector<std::string> published;  // blackboard keys this event wrote
};

struct RunTerminal {
    bool completed = false;
    std::string value;   // completed: system output value
    std::string reason;  // aborted
    std::optional<ErrorCode> code;
};

struct RunState {
    std::map<std::string, EventState> events;
    std::map<std::string, std::string> blackboard;
    std::map<std::pair<std::string, std::string>, int> loop_counters;
    std::optional<RunTerminal> terminal;
    int executed = 0;
};

struct RunLimits {
    int max_iterations_per_goto_edge = 3;
    int max_total_events = 100;
};

// A global variable named max_iterations overrides the per-edge GOTO limit.
RunLimits effective_limits(const WorkflowForm& form, RunLimits limits);

RunState initial_state(const EventGraph& graph);

// Pending events whose listened events have all completed.
std::set<std::string> ready_set(const EventGraph& graph, const RunState& state);

struct OutputSelection {
    std::string key;
    std::string value;
};

// Reads "<output=KEY>VALUE</output>" from an agent reply. Throws E_NO_OUTPUT when
// there is none.
OutputSelection parse_output_selection(const std::string& text);

std::string render_event_prompt(const Event& event, const std::map<std::string, std::string>& inputs,
                                const std::map<std::string, std::string>& globals);

struct EventRunOptions {
    LoopLimits loop;
    std::string tag;  // backend routing hint, defaults to the event name
};

// Runs the event's agent and returns the selected output. A reply naming an
// undeclared key or no key is retried once with the error appended to the task.
OutputSelection execute_event(const Event& event, const std::map<std::string, std::string>& inputs,
                              const AgentDefinition& agent, Engine& engine, ToolHost& tools,
                              const std::map<std::string, std::string>& globals, const EventRunOptions& opts = {});

void apply_action(const EventGraph& graph, RunState& state, const std::string& event, const Output& chosen,
                  const std::string& value, const RunLimits& limits, TraceLog* trace = nullptr);

enum class Parallelism { serial, concurrent };

using AgentResolver = std::function<std::optional<AgentDefinition>(const std::string&)>;

struct ExecutionRecord {
    std::string event;
    long start_seq = 0;
    long end_seq = 0;
};

struct WorkflowRunResult {
    RunTerminal terminal;
    RunState state;
    std::vector<TraceRecord> trace;
    std::vector<ExecutionRecord> executions;

    bool completed() const noexcept { return terminal.completed; }
};

struct WorkflowRunOptions {
    RunLimits limits;
    Parallelism parallelism = Parallelism::serial;
    LoopLimits loop;
};

// Agents are looked up through `agents` first; declarations in the form fill the
// gaps (a "new" agent without a registry entry gets its description as
// instructions and no tools). An event's model overrides the agent's model.
WorkflowRunResult run_workflow(const WorkflowForm& form, const std::string& system_input, Engine& engine,
                               ToolHost& tools, const AgentResolver& agents, const WorkflowRunOptions& opts = {});

}  // namespace agentos

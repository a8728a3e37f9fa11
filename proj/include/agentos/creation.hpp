#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentos/engine.hpp"
#include "agentos/forms.hpp"
#include "agentos/kernel.hpp"
#include "agentos/registry.hpp"
#include "agentos/tool_runner.hpp"
#include "agentos/trace.hpp"
#include "agentos/workflow.hpp"

namespace agentos {

enum class Phase { profiling, tools, agents, workflow, done };

std::string_view phase_name(Phase p);

struct PipelineConfig {
    int max_attempts = 3;
    AgentDefinition profiling_agent;  // defaults chosen per pipeline when name is empty
    AgentDefinition tool_editor_agent;
    AgentDefinition agent_editor_agent;
    AgentDefinition workflow_editor_agent;
    std::shared_ptr<Engine> engine;
    LoopLimits editor_limits{20, 20};
    LoopLimits run_limits;
    WorkflowRunOptions workflow_run;
    std::string model;  // profiling model; empty = engine default
};

struct PipelineOutcome {
    Phase phase_reached = Phase::profiling;
    bool success = false;
    std::optional<ErrorCode> error;  // phase_exhausted, or the backend error that stopped the run
    std::string message;
    std::vector<std::string> artifacts;  // names of registry items created by the run
    std::string task_result;             // when a task was given and ran to completion
    Context transcript;
    std::vector<std::vector<Diagnostic>> diagnostics_history;
    std::vector<TraceRecord> trace;
};

// Throws E_EMPTY on an empty list.
std::string diagnostics_to_feedback(const std::vector<Diagnostic>& diags);

// Parses a profiling reply (the first <root>...</root> span, code fences allowed)
// and validates it; reading errors come back as a single diagnostic.
std::vector<Diagnostic> check_agent_form_text(const std::string& reply, const RegistryView* registry,
                                              AgentForm* out = nullptr);
std::vector<Diagnostic> check_workflow_form_text(const std::string& reply, const RegistryView* registry,
                                                 WorkflowForm* out = nullptr);

// Profile, then create tools, then create agents (and an orchestrator for teams),
// optionally running the result on `task`. Each phase gets max_attempts tries; a
// failed run restores the registry to its state before the call.
PipelineOutcome run_agent_creation_pipeline(const std::string& requirements, Registry& registry,
                                            const ToolRunner& runner, const std::optional<std::string>& task,
                                            const PipelineConfig& config);

// Profile a workflow, register it with any new agents, optionally run it.
PipelineOutcome run_workflow_creation_pipeline(const std::string& requirements, Registry& registry,
                                               const ToolRunner& runner, const std::optional<std::string>& task,
                                               const PipelineConfig& config);

}  // namespace agentos

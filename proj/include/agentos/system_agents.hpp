#pragma once

#include <string>

#include "agentos/types.hpp"

namespace agentos {

// Backend routing tags used when the pipelines invoke these agents.
inline constexpr const char* kAgentProfilingTag = "agent_profiling";
inline constexpr const char* kWorkflowProfilingTag = "workflow_profiling";
inline constexpr const char* kToolEditorTag = "tool_editor";
inline constexpr const char* kAgentEditorTag = "agent_editor";
inline constexpr const char* kWorkflowEditorTag = "workflow_editor";

// Emits an <agents> form for a requirement. No tools.
AgentDefinition agent_profiling_agent();
// Emits a <workflow> form for a requirement. No tools.
AgentDefinition workflow_profiling_agent();
// Creates and test-runs tools through the management tools.
AgentDefinition tool_editor_agent();
// Registers agents (and an orchestrator for teams).
AgentDefinition agent_editor_agent();
// Registers the workflow and any agents it introduces.
AgentDefinition workflow_editor_agent();

}  // namespace agentos

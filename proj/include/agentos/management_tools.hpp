#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentos/engine.hpp"
#include "agentos/kernel.hpp"
#include "agentos/registry.hpp"
#include "agentos/tool_runner.hpp"
#include "agentos/workflow.hpp"

namespace agentos {

struct OrchestratorPlan {
    AgentDefinition orchestrator;
    std::vector<AgentDefinition> sub_agents;  // each gains a transfer back to the orchestrator
};

constexpr const char* kDefaultOrchestratorName = "Orchestrator Agent";

// Throws E_TOO_FEW_AGENTS for fewer than two sub-agents.
OrchestratorPlan make_orchestrator_agent(const std::vector<AgentDefinition>& sub_agents, const std::string& scenario,
                                         const std::string& name = kDefaultOrchestratorName);

// Runs a registered agent, following transfers between registered agents.
AgentRunOutcome run_registered_agent(const Registry& registry, const ToolRunner& runner, Engine& engine,
                                     const std::string& name, const std::string& task, const LoopLimits& limits = {});

AgentResolver registry_resolver(const Registry& registry);

WorkflowRunResult run_registered_workflow(const Registry& registry, const ToolRunner& runner, Engine& engine,
                                          const WorkflowForm& form, const std::string& input,
                                          const WorkflowRunOptions& opts = {});

// "a, b?, c" -> parameters a, b (optional), c.
std::vector<ToolParameter> parse_parameter_list(const std::string& spec);
// Comma separated names, trimmed, empty entries dropped.
std::vector<std::string> split_names(const std::string& list);

// list/create/delete/run for tools, agents and workflows, plus
// create_orchestrator_agent. Run operations need an engine.
class ManagementTools : public ToolHost {
public:
    ManagementTools(Registry& registry, const ToolRunner& runner, std::shared_ptr<Engine> engine = nullptr,
                    LoopLimits limits = {});

    std::optional<ToolSchema> describe(const std::string& name) const override;
    ToolResult invoke(const ToolCall& call) override;

    static std::vector<ToolSchema> schemas();
    static std::vector<std::string> names();

private:
    ToolResult dispatch(const std::string& name, const Arguments& a);

    Registry& registry_;
    const ToolRunner& runner_;
    std::shared_ptr<Engine> engine_;
    LoopLimits limits_;
};

}  // namespace agentos

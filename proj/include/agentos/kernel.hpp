#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentos/engine.hpp"
#include "agentos/error.hpp"
#include "agentos/types.hpp"

namespace agentos {

// Something that can describe and execute tools by name.
class ToolHost {
public:
    virtual ~ToolHost() = default;
    virtual std::optional<ToolSchema> describe(const std::string& name) const = 0;
    // Errors meant for the calling agent come back as ToolResult failures; thrown
    // agentos::Error values are converted to error observations by the kernel.
    virtual ToolResult invoke(const ToolCall& call) = 0;
};

// Tries each host in order; the first one that describes a tool owns it.
class ToolHostChain : public ToolHost {
public:
    ToolHostChain() = default;
    explicit ToolHostChain(std::vector<ToolHost*> hosts) : hosts_(std::move(hosts)) {}
    void add(ToolHost* host) { hosts_.push_back(host); }

    std::optional<ToolSchema> describe(const std::string& name) const override;
    ToolResult invoke(const ToolCall& call) override;

private:
    std::vector<ToolHost*> hosts_;
};

struct LoopLimits {
    int max_turns = 10;
    int max_handoffs = 20;
};

struct AgentRunOutcome {
    enum class Kind { completed, transferred, turn_limit, aborted };

    Kind kind = Kind::aborted;
    std::string text;     // completed: final text; aborted / turn_limit: reason
    std::string target;   // transferred: target agent name
    Arguments payload;    // transferred: call arguments
    std::optional<ErrorCode> error;
    std::string agent;    // agent that produced the terminal
    Context context;
    int handoffs = 0;     // orchestrate only

    bool completed() const noexcept { return kind == Kind::completed; }
};

std::string_view outcome_kind_name(AgentRunOutcome::Kind kind);

std::string transfer_tool_name(const std::string& target);
std::string transfer_back_tool_name(const std::string& target);

// Builds the chat messages an agent sees: its instructions, the task, then the
// shared turns.
std::vector<Message> render_messages(const AgentDefinition& agent, const std::string& task, const Context& context,
                                     EngineMode mode);

// `tag` is the backend routing hint; it defaults to the agent's name.
AgentRunOutcome run_agent_loop(const AgentDefinition& agent, const std::string& task, Context context,
                               Engine& engine, ToolHost& tools, const LoopLimits& limits = {},
                               const std::string& tag = {});

using AgentLookup = std::function<std::optional<AgentDefinition>(const std::string&)>;

struct TransferStep {
    AgentDefinition next;
    Context context;
};

TransferStep apply_transfer(const AgentRunOutcome& outcome, const AgentLookup& agents, Context context);

AgentRunOutcome orchestrate(const AgentDefinition& orchestrator, const std::vector<AgentDefinition>& workers,
                            const std::string& task, Engine& engine, ToolHost& tools, const LoopLimits& limits = {});

}  // namespace agentos

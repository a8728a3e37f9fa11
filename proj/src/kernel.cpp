#include "agentos/kernel.hpp"

#include <algorithm>
#include <map>

#include "agentos/text.hpp"

namespace agentos {

std::optional<ToolSchema> ToolHostChain::describe(const std::string& name) const {
    for (auto* h : hosts_) {
        if (auto s = h->describe(name)) return s;
    }
    return std::nullopt;
}

ToolResult ToolHostChain::invoke(const ToolCall& call) {
    for (auto* h : hosts_) {
        if (h->describe(call.tool_name)) return h->invoke(call);
    }
    return ToolResult::failure("E_UNKNOWN_TOOL", "no tool named " + call.tool_name);
}

std::string_view outcome_kind_name(AgentRunOutcome::Kind kind) {
    switch (kind) {
        case AgentRunOutcome::Kind::completed: return "completed";
        case AgentRunOutcome::Kind::transferred: return "transferred";
        case AgentRunOutcome::Kind::turn_limit: return "turn_limit";
        case AgentRunOutcome::Kind::aborted: return "aborted";
    }
    return "aborted";
}

std::string transfer_tool_name(const std::string& target) { return "transfer_to_" + snake_case(target); }

std::string transfer_back_tool_name(const std::string& target) {
    return "transfer_back_to_" + snake_case(target);
}

namespace {

std::string observation_text(const ToolResult& r) {
    if (r.ok()) return r.payload;
    return "error " + r.error_kind.value_or("E_UNKNOWN") + ": " + r.payload;
}

ToolSchema transfer_schema(const std::string& tool, const std::string& target) {
    return ToolSchema{tool,
                      "Hand the conversation to " + target + ".",
                      {ToolParameter{"message", "Note for " + target + " about what to do next", false}}};
}

struct ToolSet {
    std::vector<ToolSchema> schemas;
    std::map<std::string, std::string> transfers;  // tool name -> target agent
};

ToolSet resolve_tools(const AgentDefinition& agent, const ToolHost& host) {
    ToolSet set;
    std::map<std::string, std::string> by_name;
    for (const auto& target : agent.transfer_targets) {
        by_name.emplace(transfer_tool_name(target), target);
        by_name.emplace(transfer_back_tool_name(target), target);
    }
    std::vector<std::string> covered;
    for (const auto& name : agent.tool_names) {
        if (auto it = by_name.find(name); it != by_name.end()) {
            set.schemas.push_back(transfer_schema(name, it->second));
            set.transfers.emplace(name, it->second);
            covered.push_back(it->second);
            continue;
        }
        auto schema = host.describe(name);
        if (!schema) throw Error(ErrorCode::unknown_tool, "agent " + agent.name + " lists unknown tool " + name);
        set.schemas.push_back(std::move(*schema));
    }
    for (const auto& target : agent.transfer_targets) {
        if (std::find(covered.begin(), covered.end(), target) != covered.end()) continue;
        const std::string name = transfer_tool_name(target);
        set.schemas.push_back(transfer_schema(name, target));
        set.transfers.emplace(name, target);
    }
    // Calls using the other spelling are still honoured.
    for (const auto& [name, target] : by_name) set.transfers.emplace(name, target);
    return set;
}

}  // namespace

std::vector<Message> render_messages(const AgentDefinition& agent, const std::string& task, const Context& context,
                                     EngineMode mode) {
    std::vector<Message> out;
    if (!agent.instructions.empty()) out.push_back(Message{"system", agent.instructions, std::nullopt, {}});
    out.push_back(Message{"user", task, std::nullopt, {}});

    std::size_t call_no = 0;
    for (const Turn& t : context.turns()) {
        switch (t.author.kind) {
            case Author::Kind::user:
                out.push_back(Message{"user", t.content, std::nullopt, {}});
                break;
            case Author::Kind::system:
                out.push_back(Message{"user", "[system] " + t.content, std::nullopt, {}});
                break;
            case Author::Kind::tool:
                out.push_back(Message{"user", "[" + author_label(t.author) + "] " + t.content, std::nullopt, {}});
                break;
            case Author::Kind::agent:
                if (t.tool_call && mode == EngineMode::direct) {
                    const std::string id = "call_" + std::to_string(++call_no);
                    out.push_back(Message{"assistant", t.content, t.tool_call, id});
                    if (t.observation) out.push_back(Message{"tool", observation_text(*t.observation), std::nullopt, id});
                } else {
                    out.push_back(Message{"assistant", t.content, std::nullopt, {}});
                    if (t.tool_call && t.observation) {
                        out.push_back(Message{"user",
                                              "Observation from " + t.tool_call->tool_name + ":\n" +
                                                  observation_text(*t.observation),
                                              std::nullopt,
                                              {}});
                    }
                }
                if (t.note) out.push_back(Message{"user", *t.note, std::nullopt, {}});
                break;
        }
    }
    return out;
}

AgentRunOutcome run_agent_loop(const AgentDefinition& agent, const std::string& task, Context context,
                               Engine& engine, ToolHost& tools, const LoopLimits& limits, const std::string& tag) {
    const ToolSet toolset = resolve_tools(agent, tools);
    std::map<std::string, bool> allowed;
    for (const auto& s : toolset.schemas) allowed[s.name] = true;

    AgentRunOutcome out;
    out.agent = agent.name;
    const Author self = Author::agent(agent.name);

    for (int step = 0; step < limits.max_turns; ++step) {
        NextAction action;
        try {
            action = engine.next_action(render_messages(agent, task, context, engine.mode()), toolset.schemas,
                                        agent.model, tag.empty() ? agent.name : tag);
        } catch (const Error& e) {
            out.kind = AgentRunOutcome::Kind::aborted;
            out.text = e.what();
            out.error = e.code();
            out.context = std::move(context);
            return out;
        }

        if (auto* fin = std::get_if<FinalText>(&action)) {
            context.append(Turn{self, fin->text, std::nullopt, std::nullopt, std::nullopt});
            out.kind = AgentRunOutcome::Kind::completed;
            out.text = fin->text;
            out.context = std::move(context);
            return out;
        }

        if (auto* bad = std::get_if<MalformedCall>(&action)) {
            context.append(Turn{self, bad->raw, std::nullopt, std::nullopt,
                                "E_PARSE at offset " + std::to_string(bad->offset) + ": " + bad->reason});
            continue;
        }

        auto& act = std::get<CallAction>(action);
        Turn turn{self, act.raw, act.call, std::nullopt, std::nullopt};
        if (act.trailing_text) turn.note = "text after the tool call was ignored";

        if (auto it = toolset.transfers.find(act.call.tool_name); it != toolset.transfers.end()) {
            turn.observation = ToolResult::success("transferred to " + it->second);
            context.append(std::move(turn));
            out.kind = AgentRunOutcome::Kind::transferred;
            out.target = it->second;
            out.payload = act.call.arguments;
            out.context = std::move(context);
            return out;
        }

        if (!allowed.count(act.call.tool_name)) {
            turn.observation = ToolResult::failure(
                std::string(code_name(ErrorCode::unknown_tool)),
                "tool " + act.call.tool_name + " is not available to " + agent.name);
        } else {
            try {
                turn.observation = tools.invoke(act.call);
            } catch (const Error& e) {
                turn.observation = ToolResult::failure(std::string(e.code_str()), e.what());
            } catch (const std::exception& e) {
                turn.observation = ToolResult::failure("E_TOOL_FAILURE", e.what());
            }
        }
        context.append(std::move(turn));
    }

    out.kind = AgentRunOutcome::Kind::turn_limit;
    out.text = "reached max_turns=" + std::to_string(limits.max_turns);
    out.context = std::move(context);
    return out;
}

TransferStep apply_transfer(const AgentRunOutcome& outcome, const AgentLookup& agents, Context context) {
    if (outcome.kind != AgentRunOutcome::Kind::transferred) {
        throw Error(ErrorCode::unknown_agent, "outcome is not a transfer");
    }
    auto next = agents ? agents(outcome.target) : std::nullopt;
    if (!next) throw Error(ErrorCode::unknown_agent, "no agent named " + outcome.target);

    std::string note = "control passed from " + outcome.agent + " to " + next->name;
    if (auto it = outcome.payload.find("message"); it != outcome.payload.end() && !it->second.empty()) {
        note += ": " + it->second;
    }
    context.append(Turn{Author::system(), note, std::nullopt, std::nullopt, std::nullopt});
    return TransferStep{std::move(*next), std::move(context)};
}

AgentRunOutcome orchestrate(const AgentDefinition& orchestrator, const std::vector<AgentDefinition>& workers,
                            const std::string& task, Engine& engine, ToolHost& tools, const LoopLimits& limits) {
    std::map<std::string, AgentDefinition> roster;
    roster.emplace(orchestrator.name, orchestrator);
    for (const auto& w : workers) roster.emplace(w.name, w);
    const AgentLookup lookup = [&](const std::string& name) -> std::optional<AgentDefinition> {
        auto it = roster.find(name);
        if (it == roster.end()) return std::nullopt;
        return it->second;
    };

    AgentDefinition current = orchestrator;
    Context context;
    int handoffs = 0;
    while (true) {
        AgentRunOutcome out = run_agent_loop(current, task, std::move(context), engine, tools, limits);
        out.handoffs = handoffs;
        if (out.kind != AgentRunOutcome::Kind::transferred) return out;
        if (handoffs >= limits.max_handoffs) {
            out.kind = AgentRunOutcome::Kind::turn_limit;
            out.error = ErrorCode::handoff_limit;
            out.text = "reached max_handoffs=" + std::to_string(limits.max_handoffs);
            return out;
        }
        TransferStep step = apply_transfer(out, lookup, std::move(out.context));
        ++handoffs;
        current = std::move(step.next);
        context = std::move(step.context);
    }
}

}  // namespace agentos

#include <doctest.h>

#include "agentos/error.hpp"
#include "agentos/kernel.hpp"
#include "support.hpp"

using namespace agentos;
using testing::scripted;

namespace {

class EchoHost : public ToolHost {
public:
    std::optional<ToolSchema> describe(const std::string& name) const override {
        if (name == "echo") return ToolSchema{"echo", "echo", {{"text", "t", true}}};
        if (name == "web_search") return ToolSchema{"web_search", "search", {{"query", "q", true}}};
        return std::nullopt;
    }
    ToolResult invoke(const ToolCall& c) override {
        ++calls;
        if (c.tool_name == "echo") return ToolResult::success(c.arguments.at("text"));
        return ToolResult::success("results for " + c.arguments.at("query"));
    }
    int calls = 0;
};

AgentDefinition agent(std::string name, std::vector<std::string> tools = {}, std::vector<std::string> targets = {}) {
    AgentDefinition a;
    a.name = std::move(name);
    a.instructions = "You are " + a.name + ".";
    a.tool_names = std::move(tools);
    a.transfer_targets = std::move(targets);
    return a;
}

std::size_t count_transfers(const Context& ctx) {
    std::size_t n = 0;
    for (const auto& t : ctx.turns()) {
        if (t.tool_call && t.tool_call->tool_name.rfind("transfer_", 0) == 0) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("final text on the first step") {
    Engine eng(scripted({ScriptStep::text("done")}), EngineMode::direct);
    EchoHost host;
    auto out = run_agent_loop(agent("Solo"), "task", Context{}, eng, host);
    CHECK(out.kind == AgentRunOutcome::Kind::completed);
    CHECK(out.text == "done");
    CHECK(out.context.size() == 1);
}

TEST_CASE("tool calls produce observations") {
    Engine eng(scripted({ScriptStep::call("echo", {{"text", "hey"}}), ScriptStep::text("ok")}), EngineMode::direct);
    EchoHost host;
    auto out = run_agent_loop(agent("Solo", {"echo"}), "task", Context{}, eng, host);
    REQUIRE(out.completed());
    REQUIRE(out.context.size() == 2);
    const Turn& t = out.context.turns()[0];
    REQUIRE(t.observation);
    CHECK(t.observation->payload == "hey");
}

TEST_CASE("unknown tool is an error observation and the loop continues") {
    Engine eng(scripted({ScriptStep::call("rm_rf"), ScriptStep::text("sorry")}), EngineMode::direct);
    EchoHost host;
    auto out = run_agent_loop(agent("Solo", {"echo"}), "task", Context{}, eng, host);
    CHECK(out.completed());
    REQUIRE(out.context.turns()[0].observation);
    CHECK(out.context.turns()[0].observation->error_kind == "E_UNKNOWN_TOOL");
    CHECK(host.calls == 0);
}

TEST_CASE("unresolvable agent tool fails before running") {
    Engine eng(scripted({}), EngineMode::direct);
    EchoHost host;
    CHECK_THROWS_AS(run_agent_loop(agent("Solo", {"nope"}), "task", Context{}, eng, host), Error);
}

TEST_CASE("transfer ends the loop") {
    Engine eng(scripted({ScriptStep::call("transfer_to_web_agent", {{"message", "look it up"}})}), EngineMode::direct);
    EchoHost host;
    auto out = run_agent_loop(agent("Orchestrator", {}, {"Web Agent"}), "task", Context{}, eng, host);
    CHECK(out.kind == AgentRunOutcome::Kind::transferred);
    CHECK(out.target == "Web Agent");
    CHECK(out.payload.at("message") == "look it up");
}

TEST_CASE("turn limit") {
    std::vector<ScriptStep> steps(10, ScriptStep::call("echo", {{"text", "again"}}));
    Engine eng(scripted(steps), EngineMode::direct);
    EchoHost host;
    LoopLimits lim;
    lim.max_turns = 10;
    auto out = run_agent_loop(agent("Solo", {"echo"}), "task", Context{}, eng, host, lim);
    CHECK(out.kind == AgentRunOutcome::Kind::turn_limit);
    CHECK(out.context.size() == 10);
}

TEST_CASE("backend failure aborts") {
    Engine eng(scripted({ScriptStep::fail("down")}), EngineMode::direct);
    EchoHost host;
    auto out = run_agent_loop(agent("Solo"), "task", Context{}, eng, host);
    CHECK(out.kind == AgentRunOutcome::Kind::aborted);
    CHECK(out.error == ErrorCode::backend);
}

TEST_CASE("malformed transformed call is fed back") {
    Engine eng(scripted({ScriptStep::text("<function=echo><parameter=text>x"),
                         ScriptStep::text("<function=echo><parameter=text>x</parameter></function>"),
                         ScriptStep::text("fine")}),
               EngineMode::transformed);
    EchoHost host;
    auto out = run_agent_loop(agent("Solo", {"echo"}), "task", Context{}, eng, host);
    REQUIRE(out.completed());
    REQUIRE(out.context.size() == 3);
    REQUIRE(out.context.turns()[0].note);
    CHECK(out.context.turns()[0].note->find("E_PARSE") == 0);
    CHECK(out.context.turns()[1].observation->payload == "x");
}

TEST_CASE("apply_transfer") {
    AgentRunOutcome o;
    o.kind = AgentRunOutcome::Kind::transferred;
    o.target = "Coding Agent";
    o.agent = "Orchestrator";
    const AgentDefinition coder = agent("Coding Agent");
    AgentLookup lookup = [&](const std::string& n) -> std::optional<AgentDefinition> {
        if (n == coder.name) return coder;
        return std::nullopt;
    };
    Context ctx;
    ctx.append(Turn{Author::user(), "hi", {}, {}, {}});
    auto step = apply_transfer(o, lookup, ctx);
    CHECK(step.next.name == "Coding Agent");
    CHECK(step.context.size() == 2);
    CHECK(step.context.has_prefix(ctx));

    o.target = "Ghost Agent";
    try {
        apply_transfer(o, lookup, ctx);
        FAIL("expected E_UNKNOWN_AGENT");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unknown_agent);
    }
}

TEST_CASE("orchestrator round trip") {
    auto be = std::make_shared<RoutingBackend>();
    be->route("Orchestrator", scripted({ScriptStep::call("transfer_to_web_agent"), ScriptStep::text("final")}));
    be->route("Web Agent", scripted({ScriptStep::call("web_search", {{"query", "q"}}),
                                     ScriptStep::call("transfer_back_to_orchestrator")}));
    Engine eng(be, EngineMode::direct);
    EchoHost host;
    const auto orch = agent("Orchestrator", {}, {"Web Agent"});
    const auto web = agent("Web Agent", {"web_search"}, {"Orchestrator"});
    auto out = orchestrate(orch, {web}, "find it", eng, host);
    REQUIRE(out.completed());
    CHECK(out.text == "final");
    CHECK(out.handoffs == 2);
    // Oracle: transfer turns counted directly from the context.
    CHECK(count_transfers(out.context) == 2);
    // Strict order: orchestrator call, system note, web search, web transfer, system note, final.
    REQUIRE(out.context.size() == 6);
    CHECK(out.context.turns()[0].author == Author::agent("Orchestrator"));
    CHECK(out.context.turns()[1].author.kind == Author::Kind::system);
    CHECK(out.context.turns()[2].author == Author::agent("Web Agent"));
    CHECK(out.context.turns()[5].content == "final");
}

TEST_CASE("handoff limit maps to turn_limit") {
    auto be = std::make_shared<RoutingBackend>();
    be->route("A", scripted(std::vector<ScriptStep>(10, ScriptStep::call("transfer_to_b"))));
    be->route("B", scripted(std::vector<ScriptStep>(10, ScriptStep::call("transfer_to_a"))));
    Engine eng(be, EngineMode::direct);
    EchoHost host;
    LoopLimits lim;
    lim.max_handoffs = 4;
    auto out = orchestrate(agent("A", {}, {"B"}), {agent("B", {}, {"A"})}, "x", eng, host, lim);
    CHECK(out.kind == AgentRunOutcome::Kind::turn_limit);
    CHECK(out.error == ErrorCode::handoff_limit);
    CHECK(out.handoffs == 4);
    CHECK(count_transfers(out.context) == 5);
}

TEST_CASE("replay determinism and append-only contexts") {
    auto run = [] {
        Engine eng(scripted({ScriptStep::call("echo", {{"text", "a"}}), ScriptStep::call("echo", {{"text", "b"}}),
                             ScriptStep::text("end")}),
                   EngineMode::transformed);
        EchoHost host;
        Context prior;
        prior.append(Turn{Author::user(), "earlier", {}, {}, {}});
        auto out = run_agent_loop(agent("Solo", {"echo"}), "t", prior, eng, host);
        CHECK(out.context.has_prefix(prior));
        return out.context.dump();
    };
    CHECK(run() == run());
}

#include <doctest.h>

#include <algorithm>

#include "agentos/workflow.hpp"
#include "support.hpp"

using namespace agentos;
using testing::data_path;
using testing::read_text;
using testing::scripted;

namespace {

WorkflowForm load(const std::string& f) { return parse_workflow_form(read_text(data_path(f))); }

std::string reply(const std::string& key, const std::string& value) {
    return "<output=" + key + ">" + value + "</output>";
}

std::vector<ScriptStep> replies(const std::string& key, std::vector<std::string> values) {
    std::vector<ScriptStep> out;
    for (auto& v : values) out.push_back(ScriptStep::text(reply(key, v)));
    return out;
}

int runs_of(const WorkflowRunResult& r, const std::string& event) {
    return static_cast<int>(std::count_if(r.executions.begin(), r.executions.end(),
                                          [&](const ExecutionRecord& e) { return e.event == event; }));
}

// Wiki workflow where the evaluator rejects the outline `rejections` times.
std::shared_ptr<RoutingBackend> wiki_backend(int rejections) {
    auto b = std::make_shared<RoutingBackend>();
    b->route("on_search", scripted(replies("search_result", {"facts"})));
    std::vector<std::string> outlines;
    std::vector<ScriptStep> verdicts;
    for (int i = 0; i <= rejections; ++i) {
        outlines.push_back("outline v" + std::to_string(i + 1));
        verdicts.push_back(ScriptStep::text(i < rejections ? reply("negative_feedback", "too thin")
                                                           : reply("positive_feedback", "good")));
    }
    b->route("on_outline", scripted(replies("outline", outlines)));
    b->route("on_evaluate", scripted(verdicts));
    b->route("on_write", scripted(replies("article", {"the article"})));
    return b;
}

std::shared_ptr<RoutingBackend> vote_backend() {
    auto b = std::make_shared<RoutingBackend>();
    b->route("solve_with_gpt4", scripted(replies("gpt4_solution", {"42"})));
    b->route("solve_with_claude", scripted(replies("claude_solution", {"42"})));
    b->route("solve_with_deepseek", scripted(replies("deepseek_solution", {"41"})));
    b->route("aggregate_solutions", scripted(replies("final_solution", {"42"})));
    return b;
}

}  // namespace

TEST_CASE("compile_graph on the vote form") {
    auto g = compile_graph(load("majority_vote_workflow.xml"));
    CHECK(g.nodes.size() == 5);
    CHECK(g.listen_edges.at("on_start").size() == 3);
    CHECK(g.goto_edges.empty());
    CHECK(g.topo_order.front() == "on_start");
    CHECK(g.topo_order.back() == "aggregate_solutions");
}

TEST_CASE("compile_graph records GOTO edges") {
    auto g = compile_graph(load("wiki_article_workflow.xml"));
    REQUIRE(g.goto_edges.size() == 1);
    CHECK(g.goto_edges[0] == std::pair<std::string, std::string>{"on_evaluate", "on_outline"});
    CHECK(g.forward_closure("on_outline") == std::set<std::string>{"on_outline", "on_evaluate", "on_write"});
}

TEST_CASE("compile_graph refuses an invalid form") {
    auto form = load("majority_vote_workflow.xml");
    form.system_output[0].key = "nowhere";
    try {
        compile_graph(form);
        FAIL("expected E_INVALID_FORM");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_form);
    }
}

TEST_CASE("ready_set follows AND-join") {
    auto g = compile_graph(load("majority_vote_workflow.xml"));
    auto s = initial_state(g);
    CHECK(ready_set(g, s) == std::set<std::string>{"on_start"});
    s.events["on_start"].status = EventStatus::completed;
    CHECK(ready_set(g, s) == std::set<std::string>{"solve_with_gpt4", "solve_with_claude", "solve_with_deepseek"});
    s.events["solve_with_gpt4"].status = EventStatus::completed;
    s.events["solve_with_claude"].status = EventStatus::completed;
    CHECK(ready_set(g, s) == std::set<std::string>{"solve_with_deepseek"});
    s.events["solve_with_deepseek"].status = EventStatus::completed;
    CHECK(ready_set(g, s) == std::set<std::string>{"aggregate_solutions"});
}

TEST_CASE("output selection parsing") {
    auto s = parse_output_selection("thinking...\n<output=final_solution> 42 </output> trailing");
    CHECK(s.key == "final_solution");
    CHECK(s.value == "42");
    CHECK_THROWS_AS(parse_output_selection("no tag"), Error);
    CHECK_THROWS_AS(parse_output_selection("<output=x>unterminated"), Error);
}

TEST_CASE("GOTO resets the target closure and counts the edge") {
    auto g = compile_graph(load("wiki_article_workflow.xml"));
    auto s = initial_state(g);
    for (auto& [n, es] : s.events) es.status = EventStatus::completed;
    s.events["on_write"].status = EventStatus::pending;
    s.blackboard = {{"user_topic", "t"}, {"search_result", "r"}, {"outline", "o"}};
    s.events["on_outline"].published = {"outline"};
    const Event& ev = g.event("on_evaluate");
    RunLimits limits;
    apply_action(g, s, "on_evaluate", ev.outputs[1], "weak", limits);
    CHECK(s.events["on_outline"].status == EventStatus::pending);
    CHECK(s.events["on_evaluate"].status == EventStatus::pending);
    CHECK(s.events["on_search"].status == EventStatus::completed);
    CHECK(s.blackboard.count("outline") == 0);
    CHECK(s.blackboard.count("search_result") == 1);
    CHECK(s.loop_counters[{"on_evaluate", "on_outline"}] == 1);
}

TEST_CASE("majority vote completes serially") {
    Engine eng(vote_backend(), EngineMode::direct);
    ToolHostChain none;
    auto r = run_workflow(load("majority_vote_workflow.xml"), "what is 6*7", eng, none, nullptr);
    REQUIRE(r.completed());
    CHECK(r.terminal.value == "42");
    CHECK(r.executions.size() == 5);
    CHECK(r.state.blackboard.at("deepseek_solution") == "41");
    CHECK(r.trace.back().action == "COMPLETED");
}

TEST_CASE("event prompts carry inputs and the event's model") {
    auto b = vote_backend();
    auto probe = std::make_shared<ScriptedBackend>(replies("gpt4_solution", {"42"}));
    b->route("solve_with_gpt4", probe);
    Engine eng(b, EngineMode::direct);
    ToolHostChain none;
    auto r = run_workflow(load("majority_vote_workflow.xml"), "what is 6*7", eng, none, nullptr);
    REQUIRE(r.completed());
    auto reqs = probe->requests();
    REQUIRE(reqs.size() == 1);
    CHECK(reqs[0].model == "gpt-4o-2024-08-06");
    bool saw_input = false;
    for (const auto& m : reqs[0].messages) {
        if (m.content.find("<input=math_problem>what is 6*7</input>") != std::string::npos) saw_input = true;
    }
    CHECK(saw_input);
}

TEST_CASE("concurrent run keeps AND-join ordering") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto b = vote_backend();
        for (const char* ev : {"solve_with_gpt4", "solve_with_claude", "solve_with_deepseek"}) {
            auto s = std::make_shared<ScriptedBackend>(
                replies(std::string(ev).substr(std::string("solve_with_").size()) + "_solution", {"7"}));
            s->set_jitter(300, seed * 31 + ev[11]);
            b->route(ev, s);
        }
        Engine eng(b, EngineMode::direct);
        ToolHostChain none;
        WorkflowRunOptions opts;
        opts.parallelism = Parallelism::concurrent;
        auto r = run_workflow(load("majority_vote_workflow.xml"), "p", eng, none, nullptr, opts);
        REQUIRE(r.completed());
        long last_solver_end = 0;
        long agg_start = 0;
        for (const auto& e : r.executions) {
            if (e.event.rfind("solve_with_", 0) == 0) last_solver_end = std::max(last_solver_end, e.end_seq);
            if (e.event == "aggregate_solutions") agg_start = e.start_seq;
        }
        CHECK(agg_start > last_solver_end);
    }
}

TEST_CASE("evaluator-optimizer loop converges") {
    Engine eng(wiki_backend(2), EngineMode::direct);
    ToolHostChain none;
    auto r = run_workflow(load("wiki_article_workflow.xml"), "rust", eng, none, nullptr);
    REQUIRE(r.completed());
    CHECK(r.terminal.value == "the article");
    CHECK(runs_of(r, "on_outline") == 3);
    CHECK(runs_of(r, "on_evaluate") == 3);
    CHECK(runs_of(r, "on_write") == 1);
    CHECK(runs_of(r, "on_search") == 1);
    CHECK(r.state.blackboard.at("outline") == "outline v3");
}

TEST_CASE("GOTO loop limit aborts") {
    Engine eng(wiki_backend(10), EngineMode::direct);
    ToolHostChain none;
    auto r = run_workflow(load("wiki_article_workflow.xml"), "rust", eng, none, nullptr);
    REQUIRE_FALSE(r.completed());
    REQUIRE(r.terminal.code);
    CHECK(*r.terminal.code == ErrorCode::loop_limit);
    CHECK(runs_of(r, "on_evaluate") == 4);
    CHECK(runs_of(r, "on_write") == 0);
}

TEST_CASE("max_iterations global overrides the edge limit") {
    auto form = load("wiki_article_workflow.xml");
    form.global_variables.push_back({"max_iterations", "loop cap", "1"});
    CHECK(effective_limits(form, RunLimits{}).max_iterations_per_goto_edge == 1);
    Engine eng(wiki_backend(10), EngineMode::direct);
    ToolHostChain none;
    auto r = run_workflow(form, "rust", eng, none, nullptr);
    REQUIRE(r.terminal.code);
    CHECK(*r.terminal.code == ErrorCode::loop_limit);
    CHECK(runs_of(r, "on_evaluate") == 2);
}

TEST_CASE("total event limit") {
    Engine eng(wiki_backend(10), EngineMode::direct);
    ToolHostChain none;
    WorkflowRunOptions opts;
    opts.limits.max_total_events = 4;
    auto r = run_workflow(load("wiki_article_workflow.xml"), "rust", eng, none, nullptr, opts);
    REQUIRE(r.terminal.code);
    CHECK(*r.terminal.code == ErrorCode::total_limit);
    CHECK(r.state.executed == 4);
}

TEST_CASE("undeclared output is retried once, then aborts") {
    auto b = vote_backend();
    b->route("aggregate_solutions",
             scripted({ScriptStep::text(reply("bogus", "x")), ScriptStep::text(reply("final_solution", "42"))}));
    Engine eng(b, EngineMode::direct);
    ToolHostChain none;
    auto ok = run_workflow(load("majority_vote_workflow.xml"), "p", eng, none, nullptr);
    CHECK(ok.completed());

    auto b2 = vote_backend();
    b2->route("aggregate_solutions",
              scripted({ScriptStep::text(reply("bogus", "x")), ScriptStep::text("no selection at all")}));
    Engine eng2(b2, EngineMode::direct);
    auto bad = run_workflow(load("majority_vote_workflow.xml"), "p", eng2, none, nullptr);
    REQUIRE(bad.terminal.code);
    CHECK(*bad.terminal.code == ErrorCode::no_output);
}

TEST_CASE("ABORT output ends the run") {
    auto form = load("majority_vote_workflow.xml");
    Event& agg = form.events.back();
    agg.outputs[0].condition = "votes agree";
    agg.outputs.push_back({"disagreement", "no majority", std::string("votes differ"), Action{ActionType::abort, ""}});
    auto b = vote_backend();
    b->route("aggregate_solutions", scripted(replies("disagreement", {"all different"})));
    Engine eng(b, EngineMode::direct);
    ToolHostChain none;
    auto r = run_workflow(form, "p", eng, none, nullptr);
    CHECK_FALSE(r.completed());
    CHECK_FALSE(r.terminal.code);
    CHECK(r.terminal.reason.find("disagreement") != std::string::npos);
}

TEST_CASE("backend failure aborts with its code") {
    auto b = vote_backend();
    b->route("solve_with_claude", scripted({ScriptStep::fail("connection reset")}));
    Engine eng(b, EngineMode::direct);
    ToolHostChain none;
    auto r = run_workflow(load("majority_vote_workflow.xml"), "p", eng, none, nullptr);
    REQUIRE(r.terminal.code);
    CHECK(*r.terminal.code == ErrorCode::backend);
}

TEST_CASE("serial runs are deterministic") {
    auto run = [] {
        Engine eng(wiki_backend(1), EngineMode::direct);
        ToolHostChain none;
        auto r = run_workflow(load("wiki_article_workflow.xml"), "rust", eng, none, nullptr);
        TraceLog log;
        for (const auto& t : r.trace) log.add(t.subject, t.action, t.key, t.detail);
        return log.render();
    };
    CHECK(run() == run());
}

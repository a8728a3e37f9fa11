#include <doctest.h>

#include "agentos/registry.hpp"
#include "agentos/tool_runner.hpp"
#include "support.hpp"

using namespace agentos;
using testing::TempDir;

namespace {

Registry::Clock fixed_clock() {
    return [] { return std::string("2026-01-01T00:00:00Z"); };
}

ToolDefinition arith_tool() {
    return ToolDefinition::builtin(ToolSchema{"calc", "evaluate", {{"expr", "expression", true}}}, "arithmetic_eval");
}

AgentDefinition agent(const std::string& name) {
    AgentDefinition a;
    a.name = name;
    a.description = "d";
    a.instructions = "i";
    return a;
}

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error");
    return ErrorCode::usage;
}

}  // namespace

TEST_CASE("put increments versions") {
    TempDir dir;
    Registry reg(dir.path(), fixed_clock());
    CHECK(reg.put_tool(arith_tool()) == 1);
    CHECK(reg.put_tool(arith_tool()) == 2);
    CHECK(reg.put_agent(agent("A")) == 1);
    auto item = reg.get_item(ItemKind::tool, "calc");
    CHECK(item.version == 2);
    CHECK(item.created_at == "2026-01-01T00:00:00Z");
    CHECK(reg.get_tool("calc") == arith_tool());
}

TEST_CASE("file layout") {
    TempDir dir;
    Registry reg(dir.path(), fixed_clock());
    reg.put_agent(agent("Web Surfer Agent"));
    auto p = dir / "agents/Web Surfer Agent.def";
    REQUIRE(std::filesystem::exists(p));
    auto text = testing::read_text(p);
    CHECK(text.rfind("agentos-def 1\n", 0) == 0);
    auto j = nlohmann::json::parse(text.substr(text.find('\n') + 1));
    CHECK(j["kind"] == "agent");
    CHECK(j["name"] == "Web Surfer Agent");
    CHECK(j["version"] == 1);
}

TEST_CASE("names needing escapes round trip") {
    for (std::string name : {"a/b", ".hidden", "percent%sign", "colon:x", "plain name_1.2-3", "ünï"}) {
        CAPTURE(name);
        CHECK(decode_item_name(encode_item_name(name)) == name);
        CHECK(encode_item_name(name).find('/') == std::string::npos);
        CHECK(encode_item_name(name)[0] != '.');
    }
    TempDir dir;
    Registry reg(dir.path(), fixed_clock());
    reg.put_agent(agent("x/y"));
    CHECK(reg.list_items(ItemKind::agent) == std::vector<std::string>{"x/y"});
}

TEST_CASE("list is sorted and delete removes") {
    TempDir dir;
    Registry reg(dir.path(), fixed_clock());
    for (auto n : {"zeta", "Alpha", "beta"}) reg.put_agent(agent(n));
    CHECK(reg.list_items(ItemKind::agent) == std::vector<std::string>{"Alpha", "beta", "zeta"});
    reg.delete_item(ItemKind::agent, "beta");
    CHECK_FALSE(reg.has_agent("beta"));
    CHECK(code_of([&] { reg.delete_item(ItemKind::agent, "beta"); }) == ErrorCode::not_found);
    CHECK(code_of([&] { reg.get_agent("nobody"); }) == ErrorCode::not_found);
    CHECK(reg.list_items(ItemKind::workflow).empty());
}

TEST_CASE("workflow entries are validated against the registry") {
    TempDir dir;
    Registry reg(dir.path(), fixed_clock());
    auto xml = testing::read_text(testing::data_path("majority_vote_workflow.xml"));
    CHECK(reg.put_workflow(xml) == 1);
    CHECK(reg.get_workflow("parallel_math_solver_workflow").events.size() == 5);
    CHECK(reg.get_workflow_xml("parallel_math_solver_workflow") == xml);
    // A second put collides with the stored name (V1).
    CHECK(code_of([&] { reg.put_workflow(xml); }) == ErrorCode::invalid_def);
    // Wiki form references an existing agent that is not registered (V8).
    auto wiki = testing::read_text(testing::data_path("wiki_article_workflow.xml"));
    CHECK(code_of([&] { reg.put_workflow(wiki); }) == ErrorCode::invalid_def);
    reg.put_agent(agent("Web Surfer Agent"));
    CHECK(reg.put_workflow(wiki) == 1);
}

TEST_CASE("running tools") {
    TempDir dir;
    Registry reg(dir / "reg", fixed_clock());
    ToolRunner runner(dir.path());
    reg.put_tool(arith_tool());
    auto r = reg.run_tool("calc", {{"expr", "2+2"}}, runner);
    CHECK(r.ok());
    CHECK(r.payload == "4");

    auto missing = reg.run_tool("calc", {}, runner);
    CHECK_FALSE(missing.ok());
    CHECK(missing.error_kind == "E_ARGS");

    CHECK(code_of([&] { reg.run_tool("nope", {}, runner); }) == ErrorCode::not_found);

    ToolDefinition script;
    script.name = "shell_thing";
    script.description = "runs a script";
    script.schema = ToolSchema{"shell_thing", "runs a script", {}};
    script.body.kind = ToolBody::Kind::script;
    script.body.script = "echo hi";
    script.body.runner = "sh";
    reg.put_tool(script);
    CHECK(code_of([&] { reg.run_tool("shell_thing", {}, runner); }) == ErrorCode::runner_refused);
}

TEST_CASE("opt-in process runner") {
    TempDir dir;
    Registry reg(dir / "reg", fixed_clock());
    ToolRunner runner(dir.path());
    runner.set_runner("sh", std::make_shared<ProcessRunner>("/bin/sh", dir.path()));
    ToolDefinition script;
    script.name = "upper";
    script.schema = ToolSchema{"upper", "uppercase stdin", {}};
    script.body.kind = ToolBody::Kind::script;
    script.body.script = "tr a-z A-Z";
    script.body.runner = "sh";
    reg.put_tool(script);
    auto r = reg.run_tool("upper", {{"k", "v"}}, runner);
    REQUIRE(r.ok());
    CHECK(r.payload == "{\"K\":\"V\"}");

    script.name = "failing";
    script.schema.name = "failing";
    script.body.script = "exit 3";
    reg.put_tool(script);
    CHECK_FALSE(reg.run_tool("failing", {}, runner).ok());
}

TEST_CASE("arithmetic primitive") {
    CHECK(arithmetic_eval("2+2") == "4");
    CHECK(arithmetic_eval("(2+3)*4") == "20");
    CHECK(arithmetic_eval("7/2") == "3.5");
    CHECK(arithmetic_eval("-3 + 10 % 4") == "-1");
    CHECK(code_of([] { arithmetic_eval("1/0"); }) == ErrorCode::args);
    CHECK(code_of([] { arithmetic_eval("2+"); }) == ErrorCode::args);
    CHECK(code_of([] { arithmetic_eval("(1"); }) == ErrorCode::args);
}

TEST_CASE("file primitives stay inside the working directory") {
    TempDir dir;
    ToolRunner runner(dir.path());
    CHECK(runner.call_primitive("write_text_file", {{"path", "a/b.txt"}, {"content", "hello"}}).ok());
    CHECK(runner.call_primitive("read_text_file", {{"path", "a/b.txt"}}).payload == "hello");
    CHECK(code_of([&] { runner.confine("../outside"); }) == ErrorCode::io);
    CHECK(code_of([&] { runner.confine("/etc/passwd"); }) == ErrorCode::io);
}

TEST_CASE("snapshot and restore are byte exact") {
    TempDir dir;
    Registry reg(dir.path(), fixed_clock());
    reg.put_tool(arith_tool());
    reg.put_agent(agent("Keeper"));
    auto before = reg.snapshot();
    reg.put_agent(agent("Intruder"));
    reg.put_agent(agent("Keeper"));
    reg.delete_item(ItemKind::tool, "calc");
    reg.restore(before);
    CHECK(reg.snapshot() == before);
    CHECK(reg.get_item(ItemKind::agent, "Keeper").version == 1);
    CHECK_FALSE(reg.has_agent("Intruder"));
}

TEST_CASE("seeding builtin tools") {
    TempDir dir;
    Registry reg(dir / "reg", fixed_clock());
    ToolRunner runner(dir.path());
    auto added = seed_builtin_tools(reg, runner);
    CHECK(added.size() == runner.primitive_names().size());
    CHECK(seed_builtin_tools(reg, runner).empty());
    RegistryToolHost host(reg, runner);
    REQUIRE(host.describe("echo"));
    CHECK(host.invoke(ToolCall{"echo", {{"text", "x"}}}).payload == "x");
}

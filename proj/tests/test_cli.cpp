#include <doctest.h>

#include <sstream>

#include "agentos/cli.hpp"
#include "agentos/trace.hpp"
#include "support.hpp"

using namespace agentos;
using testing::TempDir;

namespace {

struct Run {
    int rc;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args, const std::string& input = {},
        std::map<std::string, std::string> env = {}) {
    std::istringstream in(input);
    std::ostringstream out, err;
    int rc = run_cli(args, CliIO{in, out, err, [env](const std::string& k) -> std::optional<std::string> {
                                     auto it = env.find(k);
                                     if (it == env.end()) return std::nullopt;
                                     return it->second;
                                 }});
    return {rc, out.str(), err.str()};
}

const char* kVoteScript = R"({"routes": {
  "solve_with_gpt4": ["<output=gpt4_solution>42</output>"],
  "solve_with_claude": ["<output=claude_solution>42</output>"],
  "solve_with_deepseek": ["<output=deepseek_solution>41</output>"],
  "aggregate_solutions": ["<output=final_solution>42</output>"]
}})";

}  // namespace

TEST_CASE("exit codes for usage errors") {
    CHECK(cli({}).rc == 2);
    CHECK(cli({"--help"}).rc == 0);
    CHECK(cli({"frobnicate"}).rc == 2);
    CHECK(cli({"validate"}).rc == 2);
    CHECK(cli({"--mode", "sideways", "validate", "x.xml"}).rc == 2);
    auto r = cli({"--cassette-mode", "replay", "validate", testing::data_path("wiki_article_workflow.xml").string()});
    CHECK(r.rc == 2);
    CHECK(r.err.find("E_USAGE") != std::string::npos);
}

TEST_CASE("validate") {
    auto ok = cli({"validate", testing::data_path("majority_vote_workflow.xml").string()});
    CHECK(ok.rc == 0);
    CHECK(ok.out == "0 diagnostics\n");

    TempDir dir;
    auto text = testing::read_text(testing::data_path("wiki_article_workflow.xml"));
    text.replace(text.find("<value>on_outline</value>"), 25, "<value>on_write</value>");
    testing::write_text(dir / "bad.xml", text);
    auto bad = cli({"validate", (dir / "bad.xml").string()});
    CHECK(bad.rc == 1);
    CHECK(bad.out.rfind("V5 /workflow/events/event[4]/outputs/output[2]/action: ", 0) == 0);
    CHECK(bad.out.find("1 diagnostics\n") != std::string::npos);

    auto js = cli({"--json", "validate", (dir / "bad.xml").string()});
    auto j = nlohmann::json::parse(js.out);
    CHECK(j["diagnostics"][0]["code"] == "V5");

    testing::write_text(dir / "broken.xml", "<workflow><name>");
    auto broken = cli({"validate", (dir / "broken.xml").string()});
    CHECK(broken.rc == 1);
    CHECK(broken.out.rfind("E_XML", 0) == 0);

    CHECK(cli({"validate", (dir / "missing.xml").string()}).rc == 1);
}

TEST_CASE("run-workflow with a scripted backend") {
    TempDir dir;
    testing::write_text(dir / "script.json", kVoteScript);
    auto r = cli({"--registry", (dir / "reg").string(), "--script", (dir / "script.json").string(), "run-workflow",
                  testing::data_path("majority_vote_workflow.xml").string(), "--input", "6*7", "--trace",
                  (dir / "trace.tsv").string()});
    CHECK(r.rc == 0);
    CHECK(r.out == "COMPLETED final_solution: 42\n");
    auto trace = parse_trace(testing::read_text(dir / "trace.tsv"));
    REQUIRE_FALSE(trace.empty());
    CHECK(trace.back().action == "COMPLETED");
    CHECK(trace.back().detail == "42");
}

TEST_CASE("cassette record then replay") {
    TempDir dir;
    testing::write_text(dir / "script.json", kVoteScript);
    const std::string form = testing::data_path("majority_vote_workflow.xml").string();
    const std::string cas = (dir / "vote.cassette").string();
    auto rec = cli({"--registry", (dir / "reg").string(), "--script", (dir / "script.json").string(), "--cassette", cas,
                    "--cassette-mode", "record", "run-workflow", form, "--input", "6*7"});
    REQUIRE(rec.rc == 0);
    std::vector<std::string> outs;
    std::vector<std::string> traces;
    for (int i = 0; i < 2; ++i) {
        auto t = (dir / ("t" + std::to_string(i))).string();
        auto rep = cli({"--registry", (dir / "reg").string(), "--cassette", cas, "--cassette-mode", "replay",
                        "run-workflow", form, "--input", "6*7", "--trace", t});
        CHECK(rep.rc == 0);
        outs.push_back(rep.out);
        traces.push_back(testing::read_text(t));
    }
    CHECK(outs[0] == rec.out);
    CHECK(outs[0] == outs[1]);
    CHECK(traces[0] == traces[1]);

    auto miss = cli({"--registry", (dir / "reg").string(), "--cassette", cas, "--cassette-mode", "replay",
                     "run-workflow", form, "--input", "different input"});
    CHECK(miss.rc == 1);
    CHECK(miss.out.find("E_CASSETTE_MISS") != std::string::npos);
}

TEST_CASE("registry subcommands") {
    TempDir dir;
    const std::string reg = (dir / "reg").string();
    auto seed = cli({"--registry", reg, "registry", "seed"});
    CHECK(seed.rc == 0);
    CHECK(seed.out.find("added echo") != std::string::npos);
    auto list = cli({"--registry", reg, "registry", "list", "tools"});
    CHECK(list.out.find("arithmetic_eval\n") != std::string::npos);
    auto show = cli({"--registry", reg, "registry", "show", "tool", "echo"});
    CHECK(show.rc == 0);
    CHECK(show.out.rfind("# echo (version 1)", 0) == 0);
    CHECK(cli({"--registry", reg, "registry", "delete", "tool", "echo"}).rc == 0);
    auto gone = cli({"--registry", reg, "registry", "show", "tool", "echo"});
    CHECK(gone.rc == 1);
    CHECK(gone.err.find("E_NOT_FOUND") != std::string::npos);
    CHECK(cli({"--registry", reg, "registry", "list", "gadgets"}).rc != 0);
}

TEST_CASE("rag subcommands") {
    TempDir dir;
    testing::write_text(dir / "docs/a.txt", "the lighthouse keeper trims the wick every night");
    testing::write_text(dir / "docs/b.md", "bread needs flour water salt and yeast");
    const std::string root = (dir / "rag").string();
    auto add = cli({"--rag-root", root, "rag", "add", (dir / "docs").string(), "--collection", "misc"});
    CHECK(add.rc == 0);
    CHECK(add.out.find("files_ingested 2") != std::string::npos);
    auto q = cli({"--rag-root", root, "rag", "query", "flour and yeast", "--collection", "misc", "-k", "1"});
    CHECK(q.rc == 0);
    CHECK(q.out.rfind("[1] docs/b.md#0", 0) == 0);
    auto missing = cli({"--rag-root", root, "rag", "query", "x", "--collection", "nope"});
    CHECK(missing.rc == 1);

    testing::write_text(dir / "script.json",
                        R"({"routes": {"can_answer": ["yes"], "answer_query": ["every night"]}})");
    auto ans = cli({"--rag-root", root, "--script", (dir / "script.json").string(), "rag", "answer",
                    "when is the wick trimmed?", "--collection", "misc"});
    CHECK(ans.rc == 0);
    CHECK(ans.out == "ANSWER every night\n");
}

TEST_CASE("api key is never echoed") {
    TempDir dir;
    auto r = cli({"--registry", (dir / "reg").string(), "--api-base", "http://127.0.0.1:9", "run-workflow",
                  testing::data_path("majority_vote_workflow.xml").string(), "--input", "x"},
                 {}, {{"AGENT_API_KEY", "sk-very-secret-value"}});
    CHECK(r.rc == 1);
    CHECK(r.out.find("sk-very-secret-value") == std::string::npos);
    CHECK(r.err.find("sk-very-secret-value") == std::string::npos);
    CHECK(r.out.find("E_BACKEND") != std::string::npos);
}

TEST_CASE("missing backend configuration") {
    TempDir dir;
    auto r = cli({"--registry", (dir / "reg").string(), "run-workflow",
                  testing::data_path("majority_vote_workflow.xml").string(), "--input", "x"});
    CHECK(r.rc == 1);
    CHECK(r.err.find("E_CONFIG") != std::string::npos);
}

TEST_CASE("repl session") {
    TempDir dir;
    testing::write_text(dir / "script.json", R"({"routes": {"agent_profiling": ["not a form"]}})");
    const std::string log = (dir / "session.tsv").string();
    auto r = cli({"--registry", (dir / "reg").string(), "--script", (dir / "script.json").string(), "repl",
                  "--max-attempts", "1", "--session-log", log},
                 ":mode workflow\n:mode agents\n:what\nbuild me a poet\n:quit\n");
    CHECK(r.rc == 0);
    CHECK(r.out.rfind("agentos> mode workflow\n", 0) == 0);
    CHECK(r.out.find("unknown command :what") != std::string::npos);
    CHECK(r.out.find("success: no") != std::string::npos);
    auto records = parse_trace(testing::read_text(log));
    std::vector<std::string> actions;
    for (const auto& t : records) actions.push_back(t.action);
    CHECK(actions == std::vector<std::string>{"MODE", "MODE", "INPUT", "OUTCOME"});
    CHECK(records[3].key == "failure");
}

#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "agentos/backend.hpp"
#include "agentos/engine.hpp"
#include "agentos/error.hpp"
#include "support.hpp"

using namespace agentos;
using testing::scripted;

TEST_CASE("transformed mode parses calls and text") {
    auto be = scripted({ScriptStep::text("<function=web_search><parameter=query>gaia</parameter></function>"),
                        ScriptStep::text("The answer is 4."),
                        ScriptStep::text("<function=web_search><parameter=query>x</parameter>")});
    Engine eng(be, EngineMode::transformed);
    const std::vector<ToolSchema> tools{{"web_search", "Search", {{"query", "q", true}}}};
    std::vector<Message> msgs{{"system", "be useful", std::nullopt, {}}, {"user", "hi", std::nullopt, {}}};

    auto a = eng.next_action(msgs, tools);
    REQUIRE(std::holds_alternative<CallAction>(a));
    CHECK(std::get<CallAction>(a).call == ToolCall{"web_search", {{"query", "gaia"}}});
    // Schema text lands in the system message; no schemas go over the wire.
    const auto sent = be->requests().front();
    CHECK(sent.tools.empty());
    CHECK(sent.messages.front().content.find("<function=web_search>") != std::string::npos);

    a = eng.next_action(msgs, tools);
    REQUIRE(std::holds_alternative<FinalText>(a));
    CHECK(std::get<FinalText>(a).text == "The answer is 4.");

    a = eng.next_action(msgs, tools);
    REQUIRE(std::holds_alternative<MalformedCall>(a));
    CHECK(std::get<MalformedCall>(a).offset == 0);
}

TEST_CASE("direct mode relays structured calls") {
    auto be = scripted({ScriptStep::call("click", {{"bid", "12"}})});
    Engine eng(be, EngineMode::direct);
    const std::vector<ToolSchema> tools{{"click", "Click", {{"bid", "id", true}}}};
    auto a = eng.next_action({{"user", "go", std::nullopt, {}}}, tools);
    REQUIRE(std::holds_alternative<CallAction>(a));
    CHECK(std::get<CallAction>(a).call == ToolCall{"click", {{"bid", "12"}}});
    CHECK(be->requests().front().tools == tools);
}

TEST_CASE("scripted backend is a queue") {
    auto be = scripted({ScriptStep::text("hi")});
    CompletionRequest req;
    CHECK(be->complete(req).content == "hi");
    try {
        be->complete(req);
        FAIL("expected exhaustion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::script_exhausted);
    }
}

TEST_CASE("request digest ignores the tag") {
    CompletionRequest a;
    a.model = "m";
    a.messages = {{"user", "x", std::nullopt, {}}};
    CompletionRequest b = a;
    b.tag = "other";
    CHECK(request_digest(a) == request_digest(b));
    b.model = "n";
    CHECK(request_digest(a) != request_digest(b));
    CHECK(request_digest(a).size() == 64);
}

TEST_CASE("cassette record then replay") {
    testing::TempDir dir;
    const auto path = dir / "session.cassette";
    CompletionRequest req;
    req.model = "m";
    req.messages = {{"user", "q", std::nullopt, {}}};
    CompletionResponse first, second;
    {
        auto inner = scripted({ScriptStep::text("one"), ScriptStep::call("f", {{"a", "b"}})});
        CassetteBackend rec(path, CassetteMode::record, inner);
        first = rec.complete(req);
        second = rec.complete(req);
        CHECK(rec.forwarded() == 2);
    }
    CassetteBackend play(path, CassetteMode::replay);
    CHECK(play.complete(req) == first);
    CHECK(play.complete(req) == second);
    try {
        play.complete(req);
        FAIL("expected a miss");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::cassette_miss);
    }
    // A recorder reopening the file replays before forwarding.
    auto inner = scripted({});
    CassetteBackend again(path, CassetteMode::record, inner);
    CHECK(again.complete(req) == first);
    CHECK(again.forwarded() == 0);
}

TEST_CASE("http backend against a local server") {
    httplib::Server srv;
    int hits = 0;
    std::string auth;
    srv.Post("/v1/chat/completions", [&](const httplib::Request& r, httplib::Response& res) {
        ++hits;
        auth = r.get_header_value("Authorization");
        const auto body = nlohmann::json::parse(r.body);
        if (body["model"] == "flaky") {
            res.status = 500;
            return;
        }
        nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", nullptr},
            {"tool_calls", {{{"id", "c1"}, {"type", "function"},
                {"function", {{"name", "click"}, {"arguments", "{\"bid\":\"7\"}"}}}}}}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = srv.bind_to_any_port("127.0.0.1");
    std::thread t([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();

    HttpConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.api_key = "sk-test";
    cfg.retry = {3, std::chrono::milliseconds(1)};
    HttpBackend be(cfg);
    CompletionRequest req;
    req.model = "good";
    req.messages = {{"user", "x", std::nullopt, {}}};
    const auto r = be.complete(req);
    REQUIRE(r.tool_call);
    CHECK(*r.tool_call == ToolCall{"click", {{"bid", "7"}}});
    CHECK(auth == "Bearer sk-test");

    hits = 0;
    req.model = "flaky";
    try {
        be.complete(req);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::backend);
        CHECK(std::string(e.what()).find("sk-test") == std::string::npos);
    }
    CHECK(hits == 3);
    srv.stop();
    t.join();

    CHECK_THROWS_AS(HttpBackend(HttpConfig{}), Error);
}

TEST_CASE("chat request encoding") {
    CompletionRequest req;
    req.model = "m";
    req.mode = EngineMode::direct;
    req.tools = {{"f", "does f", {{"a", "first", true}, {"b", "second", false}}}};
    req.messages = {{"user", "go", std::nullopt, {}},
                    {"assistant", "", ToolCall{"f", {{"a", "1"}}}, "call_1"},
                    {"tool", "ok", std::nullopt, "call_1"}};
    const auto j = build_chat_request(req);
    CHECK(j["model"] == "m");
    CHECK(j["messages"][1]["tool_calls"][0]["function"]["name"] == "f");
    CHECK(j["messages"][2]["tool_call_id"] == "call_1");
    CHECK(j["tools"][0]["function"]["parameters"]["required"] == nlohmann::json::array({"a"}));
    req.mode = EngineMode::transformed;
    CHECK_FALSE(build_chat_request(req).contains("tools"));
}

TEST_CASE("scripted backend from JSON") {
    auto spec = nlohmann::json::parse(R"({
      "default": ["fallback"],
      "routes": {"Planner": [{"call": {"name": "echo", "arguments": {"text": "hi", "n": 3}}}, {"fail": "down"}]},
      "models": {"tiny": [{"text": "from model"}]}
    })");
    auto b = scripted_backend_from_json(spec);
    CompletionRequest req;
    req.tag = "Planner";
    auto r = b->complete(req);
    REQUIRE(r.tool_call);
    CHECK(r.tool_call->tool_name == "echo");
    CHECK(r.tool_call->arguments.at("text") == "hi");
    CHECK(r.tool_call->arguments.at("n") == "3");
    CHECK_THROWS_AS(b->complete(req), Error);
    req.tag = "other";
    req.model = "tiny";
    CHECK(b->complete(req).content == "from model");
    req.model = "big";
    CHECK(b->complete(req).content == "fallback");
}

#include "scenarios.hpp"

#include "support.hpp"

namespace testing {

using namespace agentos;

void seed_existing_tools(Registry& registry) {
    for (const char* name : {"visual_question_answering", "save_raw_docs_to_vector_db", "query_db"}) {
        registry.put_tool(ToolDefinition::builtin(ToolSchema{name, "stand-in", {{"text", "input", true}}}, "echo"));
    }
}

std::vector<ScriptStep> tool_editor_steps(const std::vector<std::string>& tools, bool test_run) {
    std::vector<ScriptStep> out;
    for (const auto& t : tools) {
        out.push_back(ScriptStep::call("create_tool", {{"name", t},
                                                       {"description", "stand-in for " + t},
                                                       {"parameters", "text"},
                                                       {"primitive", "echo"}}));
        if (test_run) {
            out.push_back(ScriptStep::call("run_tool", {{"name", t}, {"arguments", R"({"text":"probe"})"}}));
        }
        out.push_back(ScriptStep::text("created " + t));
    }
    return out;
}

std::string davinci_form() { return read_text(data_path("davinci_agent_form.xml")); }
std::string wiki_form() { return read_text(data_path("wiki_article_workflow.xml")); }

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    auto at = text.find(from);
    if (at != std::string::npos) text.replace(at, from.size(), to);
    return text;
}

std::shared_ptr<RoutingBackend> davinci_backend(const std::vector<std::string>& profiling_replies,
                                                const std::string& task_reply) {
    auto b = std::make_shared<RoutingBackend>();
    std::vector<ScriptStep> prof;
    for (const auto& r : profiling_replies) prof.push_back(ScriptStep::text(r));
    b->route("agent_profiling", scripted(prof));
    b->route("tool_editor", scripted(tool_editor_steps({"generate_image", "refine_image"})));
    b->route("agent_editor",
             scripted({ScriptStep::call("create_agent",
                                        {{"name", "DaVinci Agent"},
                                         {"description", "Draws and critiques images."},
                                         {"instructions", "Generate the image, evaluate it, refine it."},
                                         {"tools", "visual_question_answering, generate_image, refine_image"}}),
                       ScriptStep::text("registered")}));
    if (!task_reply.empty()) b->route("DaVinci Agent", scripted({ScriptStep::text(task_reply)}));
    return b;
}

std::shared_ptr<RoutingBackend> wiki_backend(const std::vector<std::string>& profiling_replies) {
    auto b = std::make_shared<RoutingBackend>();
    std::vector<ScriptStep> prof;
    for (const auto& r : profiling_replies) prof.push_back(ScriptStep::text(r));
    b->route("workflow_profiling", scripted(prof));
    std::vector<ScriptStep> editor;
    for (const char* a : {"Outline Agent", "Evaluator Agent", "Article Writer Agent"}) {
        editor.push_back(ScriptStep::call(
            "create_agent", {{"name", a}, {"description", std::string(a) + " role"}, {"instructions", "Do the job."}}));
    }
    editor.push_back(ScriptStep::call("create_workflow", {{"xml", wiki_form()}}));
    editor.push_back(ScriptStep::text("workflow registered"));
    b->route("workflow_editor", scripted(editor));
    auto out = [](const std::string& k, const std::string& v) {
        return ScriptStep::text("<output=" + k + ">" + v + "</output>");
    };
    b->route("on_search", scripted({out("search_result", "notes")}));
    b->route("on_outline", scripted({out("outline", "o1"), out("outline", "o2")}));
    b->route("on_evaluate", scripted({out("negative_feedback", "thin"), out("positive_feedback", "fine")}));
    b->route("on_write", scripted({out("article", "final article")}));
    return b;
}

}  // namespace testing

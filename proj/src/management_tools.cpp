#include "agentos/management_tools.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "agentos/error.hpp"
#include "agentos/text.hpp"

namespace agentos {

using nlohmann::json;

OrchestratorPlan make_orchestrator_agent(const std::vector<AgentDefinition>& sub_agents, const std::string& scenario,
                                         const std::string& name) {
    if (sub_agents.size() < 2) {
        throw Error(ErrorCode::too_few_agents,
                    "an orchestrator needs at least two sub-agents, got " + std::to_string(sub_agents.size()));
    }
    OrchestratorPlan plan;
    AgentDefinition& o = plan.orchestrator;
    o.name = name;
    o.description = "Coordinates " + std::to_string(sub_agents.size()) + " agents for: " + scenario;
    std::string team;
    for (const auto& a : sub_agents) {
        if (a.name == name) throw Error(ErrorCode::invalid_def, "sub-agent shares the orchestrator name " + name);
        o.transfer_targets.push_back(a.name);
        o.tool_names.push_back(transfer_tool_name(a.name));
        team += "- " + a.name + " (" + transfer_tool_name(a.name) + "): " + a.description + "\n";
    }
    o.instructions = "You lead a small team of agents.\n\nScenario:\n" + scenario +
                     "\n\nTeam members and the tool that hands work to each:\n" + team +
                     "\nSplit the request into sub-tasks that each fit one member. Hand over one sub-task at a "
                     "time and say precisely what you need back. When a member returns, check the result "
                     "before moving on. Once every part is done, reply to the user with the combined answer "
                     "and no tool call.";
    for (auto a : sub_agents) {
        if (std::find(a.transfer_targets.begin(), a.transfer_targets.end(), name) == a.transfer_targets.end()) {
            a.transfer_targets.push_back(name);
        }
        const std::string back = transfer_back_tool_name(name);
        if (std::find(a.tool_names.begin(), a.tool_names.end(), back) == a.tool_names.end()) a.tool_names.push_back(back);
        plan.sub_agents.push_back(std::move(a));
    }
    return plan;
}

AgentResolver registry_resolver(const Registry& registry) {
    return [&registry](const std::string& name) -> std::optional<AgentDefinition> {
        if (!registry.has_agent(name)) return std::nullopt;
        return registry.get_agent(name);
    };
}

AgentRunOutcome run_registered_agent(const Registry& registry, const ToolRunner& runner, Engine& engine,
                                     const std::string& name, const std::string& task, const LoopLimits& limits) {
    const AgentDefinition root = registry.get_agent(name);
    std::vector<AgentDefinition> workers;
    std::set<std::string> seen{root.name};
    std::vector<std::string> frontier = root.transfer_targets;
    while (!frontier.empty()) {
        const std::string next = frontier.back();
        frontier.pop_back();
        if (!seen.insert(next).second || !registry.has_agent(next)) continue;
        workers.push_back(registry.get_agent(next));
        for (const auto& t : workers.back().transfer_targets) frontier.push_back(t);
    }
    RegistryToolHost host(registry, runner);
    return orchestrate(root, workers, task, engine, host, limits);
}

WorkflowRunResult run_registered_workflow(const Registry& registry, const ToolRunner& runner, Engine& engine,
                                          const WorkflowForm& form, const std::string& input,
                                          const WorkflowRunOptions& opts) {
    RegistryToolHost host(registry, runner);
    return run_workflow(form, input, engine, host, registry_resolver(registry), opts);
}

std::vector<std::string> split_names(const std::string& list) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t comma = list.find(',', start);
        if (comma == std::string::npos) comma = list.size();
        std::string item = trim(std::string_view(list).substr(start, comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        start = comma + 1;
    }
    return out;
}

std::vector<ToolParameter> parse_parameter_list(const std::string& spec) {
    std::vector<ToolParameter> out;
    for (auto item : split_names(spec)) {
        bool required = true;
        if (item.back() == '?') {
            required = false;
            item = trim(std::string_view(item).substr(0, item.size() - 1));
        }
        out.push_back({item, item, required});
    }
    return out;
}

// ---------------------------------------------------------------- tool host

namespace {

const std::vector<ToolSchema>& all_schemas() {
    static const std::vector<ToolSchema> s{
        {"list_tools", "List the names of registered tools.", {}},
        {"create_tool",
         "Register or replace a tool. Give either `primitive` (a builtin to delegate to) or `script` and "
         "`runner`.",
         {{"name", "Tool name (identifier)", true},
          {"description", "What the tool does", true},
          {"parameters", "Comma separated parameter names; suffix ? marks optional ones", false},
          {"primitive", "Builtin primitive to delegate to", false},
          {"script", "Script source for an external runner", false},
          {"runner", "Runner id for the script", false}}},
        {"delete_tool", "Remove a registered tool.", {{"name", "Tool name", true}}},
        {"run_tool",
         "Invoke a registered tool.",
         {{"name", "Tool name", true}, {"arguments", "JSON object of string arguments", false}}},
        {"list_agents", "List the names of registered agents.", {}},
        {"create_agent",
         "Register or replace an agent.",
         {{"name", "Agent name", true},
          {"description", "One line summary", true},
          {"instructions", "System instructions", true},
          {"tools", "Comma separated tool names", false},
          {"model", "Model id", false}}},
        {"delete_agent", "Remove a registered agent.", {{"name", "Agent name", true}}},
        {"run_agent",
         "Run a registered agent on a task and return its final answer.",
         {{"name", "Agent name", true}, {"task", "The task", true}}},
        {"create_orchestrator_agent",
         "Create an agent that splits work among the given registered agents and links them to it.",
         {{"sub_agents", "Comma separated agent names (at least two)", true},
          {"scenario", "What the team is for", true},
          {"name", "Orchestrator name", false}}},
        {"list_workflows", "List the names of registered workflows.", {}},
        {"create_workflow", "Validate and register a workflow form given as XML.", {{"xml", "Workflow form", true}}},
        {"delete_workflow", "Remove a registered workflow.", {{"name", "Workflow name", true}}},
        {"run_workflow",
         "Run a registered workflow on an input and return its result.",
         {{"name", "Workflow name", true}, {"input", "Value for the system input", true}}},
    };
    return s;
}

std::string lines(const std::vector<std::string>& names) {
    if (names.empty()) return "(none)";
    return join(names, "\n");
}

std::string opt(const Arguments& a, const std::string& k) {
    auto it = a.find(k);
    return it == a.end() ? std::string() : it->second;
}

}  // namespace

ManagementTools::ManagementTools(Registry& registry, const ToolRunner& runner, std::shared_ptr<Engine> engine,
                                 LoopLimits limits)
    : registry_(registry), runner_(runner), engine_(std::move(engine)), limits_(limits) {}

std::vector<ToolSchema> ManagementTools::schemas() { return all_schemas(); }

std::vector<std::string> ManagementTools::names() {
    std::vector<std::string> out;
    for (const auto& s : all_schemas()) out.push_back(s.name);
    return out;
}

std::optional<ToolSchema> ManagementTools::describe(const std::string& name) const {
    for (const auto& s : all_schemas()) {
        if (s.name == name) return s;
    }
    return std::nullopt;
}

ToolResult ManagementTools::invoke(const ToolCall& call) {
    const auto schema = describe(call.tool_name);
    if (!schema) return ToolResult::failure("E_UNKNOWN_TOOL", "no management tool " + call.tool_name);
    for (const auto& p : schema->parameters) {
        if (p.required && !call.arguments.count(p.name)) {
            return ToolResult::failure("E_ARGS", "missing required argument '" + p.name + "'");
        }
    }
    try {
        return dispatch(call.tool_name, call.arguments);
    } catch (const Error& e) {
        return ToolResult::failure(std::string(e.code_str()), e.what());
    }
}

ToolResult ManagementTools::dispatch(const std::string& name, const Arguments& a) {
    auto need_engine = [&] {
        if (!engine_) throw Error(ErrorCode::config, name + " needs a configured backend");
        return engine_.get();
    };

    if (name == "list_tools") return ToolResult::success(lines(registry_.list_items(ItemKind::tool)));
    if (name == "list_agents") return ToolResult::success(lines(registry_.list_items(ItemKind::agent)));
    if (name == "list_workflows") return ToolResult::success(lines(registry_.list_items(ItemKind::workflow)));

    if (name == "create_tool") {
        ToolDefinition t;
        t.name = a.at("name");
        t.description = a.at("description");
        t.schema = ToolSchema{t.name, t.description, parse_parameter_list(opt(a, "parameters"))};
        const std::string primitive = opt(a, "primitive");
        const std::string script = opt(a, "script");
        if (primitive.empty() == script.empty()) {
            return ToolResult::failure("E_ARGS", "give exactly one of primitive or script");
        }
        if (!primitive.empty()) {
            if (!runner_.has_primitive(primitive)) {
                return ToolResult::failure("E_NOT_FOUND", "no primitive named " + primitive);
            }
            t.body = ToolBody{ToolBody::Kind::builtin, primitive, {}, {}};
        } else {
            t.body = ToolBody{ToolBody::Kind::script, {}, script, opt(a, "runner")};
        }
        const int v = registry_.put_tool(t);
        return ToolResult::success("tool " + t.name + " saved (version " + std::to_string(v) + ")");
    }
    if (name == "create_agent") {
        AgentDefinition d;
        d.name = a.at("name");
        d.description = a.at("description");
        d.instructions = a.at("instructions");
        d.tool_names = split_names(opt(a, "tools"));
        d.model = opt(a, "model");
        if (registry_.has_agent(d.name)) d.transfer_targets = registry_.get_agent(d.name).transfer_targets;
        for (const auto& t : d.tool_names) {
            if (!registry_.has_tool(t) && t.rfind("transfer_", 0) != 0) {
                return ToolResult::failure("E_NOT_FOUND", "agent " + d.name + " lists unregistered tool " + t);
            }
        }
        const int v = registry_.put_agent(d);
        return ToolResult::success("agent " + d.name + " saved (version " + std::to_string(v) + ")");
    }
    if (name == "create_orchestrator_agent") {
        std::vector<AgentDefinition> subs;
        for (const auto& n : split_names(a.at("sub_agents"))) subs.push_back(registry_.get_agent(n));
        const std::string oname = opt(a, "name").empty() ? kDefaultOrchestratorName : opt(a, "name");
        const OrchestratorPlan plan = make_orchestrator_agent(subs, a.at("scenario"), oname);
        registry_.put_agent(plan.orchestrator);
        for (const auto& s : plan.sub_agents) registry_.put_agent(s);
        return ToolResult::success("agent " + oname + " saved with transfers to " + join(plan.orchestrator.transfer_targets, ", "));
    }
    if (name == "create_workflow") {
        const int v = registry_.put_workflow(a.at("xml"));
        const WorkflowForm f = parse_workflow_form(a.at("xml"));
        return ToolResult::success("workflow " + f.name + " saved (version " + std::to_string(v) + ")");
    }
    if (name == "delete_tool" || name == "delete_agent" || name == "delete_workflow") {
        const ItemKind k = name == "delete_tool" ? ItemKind::tool : name == "delete_agent" ? ItemKind::agent : ItemKind::workflow;
        registry_.delete_item(k, a.at("name"));
        return ToolResult::success(std::string(kind_name(k)) + " " + a.at("name") + " deleted");
    }
    if (name == "run_tool") {
        Arguments args;
        const std::string raw = opt(a, "arguments");
        if (!raw.empty()) {
            auto j = json::parse(raw, nullptr, false);
            if (j.is_discarded() || !j.is_object()) return ToolResult::failure("E_ARGS", "arguments must be a JSON object");
            for (const auto& [k, v] : j.items()) args[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        if (!registry_.has_tool(a.at("name"))) return ToolResult::failure("E_NOT_FOUND", "no tool named " + a.at("name"));
        return registry_.run_tool(a.at("name"), args, runner_);
    }
    if (name == "run_agent") {
        Engine* e = need_engine();
        const AgentRunOutcome out = run_registered_agent(registry_, runner_, *e, a.at("name"), a.at("task"), limits_);
        if (out.completed()) return ToolResult::success(out.text);
        return ToolResult::failure(out.error ? std::string(code_name(*out.error)) : "E_RUN_FAILED",
                                   std::string(outcome_kind_name(out.kind)) + ": " + out.text);
    }
    if (name == "run_workflow") {
        Engine* e = need_engine();
        const WorkflowForm form = registry_.get_workflow(a.at("name"));
        WorkflowRunOptions opts;
        opts.loop = limits_;
        const WorkflowRunResult r = run_registered_workflow(registry_, runner_, *e, form, a.at("input"), opts);
        if (r.completed()) return ToolResult::success(r.terminal.value);
        return ToolResult::failure(r.terminal.code ? std::string(code_name(*r.terminal.code)) : "E_ABORTED",
                                   r.terminal.reason);
    }
    return ToolResult::failure("E_UNKNOWN_TOOL", "no management tool " + name);
}

}  // namespace agentos

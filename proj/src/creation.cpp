#include "agentos/creation.hpp"

#include <algorithm>
#include <set>

#include "agentos/error.hpp"
#include "agentos/management_tools.hpp"
#include "agentos/system_agents.hpp"
#include "agentos/text.hpp"

namespace agentos {

std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::profiling: return "profiling";
        case Phase::tools: return "tools";
        case Phase::agents: return "agents";
        case Phase::workflow: return "workflow";
        case Phase::done: return "done";
    }
    return "profiling";
}

std::string diagnostics_to_feedback(const std::vector<Diagnostic>& diags) {
    if (diags.empty()) throw Error(ErrorCode::empty, "no diagnostics to report");
    std::string out = "The form was rejected. Problems found (" + std::to_string(diags.size()) + "):\n";
    for (const auto& d : diags) out += "- " + d.code + " at " + d.path + ": " + d.message + "\n";
    out += "Send the complete corrected form.";
    return out;
}

namespace {

// First <root ...>...</root> span of a reply; the whole reply when there is none.
std::string extract_form(const std::string& reply, const std::string& root) {
    std::size_t open = reply.find("<" + root + ">");
    if (open == std::string::npos) open = reply.find("<" + root + " ");
    const std::string close = "</" + root + ">";
    if (open == std::string::npos) return reply;
    const std::size_t end = reply.find(close, open);
    if (end == std::string::npos) return reply.substr(open);
    return reply.substr(open, end + close.size() - open);
}

std::vector<Diagnostic> read_error(const Error& e) {
    if (auto* fe = dynamic_cast<const FormError*>(&e)) {
        return {Diagnostic{std::string(fe->code_str()), fe->reason(), fe->path()}};
    }
    return {Diagnostic{std::string(e.code_str()), e.what(), "/"}};
}

bool fatal_backend(ErrorCode c) {
    return c == ErrorCode::backend || c == ErrorCode::script_exhausted || c == ErrorCode::cassette_miss ||
           c == ErrorCode::config;
}

// Stops the whole pipeline (after rollback).
struct Stop {
    ErrorCode code;
    std::string message;
};

class Pipeline {
public:
    Pipeline(Registry& registry, const ToolRunner& runner, const PipelineConfig& config)
        : registry_(registry), runner_(runner), config_(config), start_(registry.snapshot()) {
        if (!config_.engine) throw Error(ErrorCode::config, "pipeline needs an engine");
        if (config_.max_attempts < 1) throw Error(ErrorCode::args, "max_attempts must be at least 1");
        for (auto k : {ItemKind::tool, ItemKind::agent, ItemKind::workflow}) before_[static_cast<int>(k)] = registry.list_items(k);
    }

    PipelineOutcome& out() { return out_; }
    TraceLog& trace() { return trace_; }
    int attempts() const { return config_.max_attempts; }

    void phase(Phase p) {
        out_.phase_reached = p;
        trace_.add("pipeline", "PHASE", std::string(phase_name(p)));
    }

    void attempt(Phase p, int n) { trace_.add(std::string(phase_name(p)), "ATTEMPT", std::to_string(n)); }
    void fail(Phase p, const std::string& why) {
        trace_.add(std::string(phase_name(p)), "FAIL", {}, why);
        out_.transcript.append(Turn{Author::system(), "[" + std::string(phase_name(p)) + "] " + why, {}, {}, {}});
    }
    void success(Phase p, const std::string& detail = {}) {
        trace_.add(std::string(phase_name(p)), "SUCCESS", {}, detail);
    }

    // Profiling reply via a plain completion; backend errors stop the run.
    std::string ask(const AgentDefinition& agent, const std::string& request, const char* tag) {
        try {
            std::string reply = config_.engine->complete_text(agent.instructions, request,
                                                              config_.model.empty() ? agent.model : config_.model, tag);
            out_.transcript.append(Turn{Author::user(), request, {}, {}, {}});
            out_.transcript.append(Turn{Author::agent(agent.name), reply, {}, {}, {}});
            return reply;
        } catch (const Error& e) {
            throw Stop{e.code(), e.what()};
        }
    }

    AgentRunOutcome edit(const AgentDefinition& editor, const std::string& task, const char* tag) {
        ManagementTools host(registry_, runner_, config_.engine, config_.run_limits);
        AgentRunOutcome r = run_agent_loop(editor, task, Context{}, *config_.engine, host, config_.editor_limits, tag);
        for (const auto& t : r.context.turns()) out_.transcript.append(t);
        if (r.kind == AgentRunOutcome::Kind::aborted && r.error && fatal_backend(*r.error)) {
            throw Stop{*r.error, r.text};
        }
        return r;
    }

    template <class Form, class Check>
    std::optional<Form> profile(const AgentDefinition& agent, const std::string& requirements, const char* tag,
                                Check check) {
        phase(Phase::profiling);
        std::string request = "Requirement:\n" + requirements;
        for (int n = 1; n <= attempts(); ++n) {
            attempt(Phase::profiling, n);
            const std::string reply = ask(agent, request, tag);
            Form form;
            auto diags = check(reply, &registry_, &form);
            if (diags.empty()) {
                success(Phase::profiling);
                return form;
            }
            std::string codes;
            for (const auto& d : diags) codes += (codes.empty() ? "" : " ") + d.code;
            fail(Phase::profiling, codes);
            out_.diagnostics_history.push_back(diags);
            request = "Requirement:\n" + requirements + "\n\n" + diagnostics_to_feedback(diags);
        }
        return std::nullopt;
    }

    void restore_to(const RegistrySnapshot& s) { registry_.restore(s); }

    PipelineOutcome exhausted(Phase p) {
        registry_.restore(start_);
        out_.success = false;
        out_.error = ErrorCode::phase_exhausted;
        out_.message = "phase " + std::string(phase_name(p)) + " failed " + std::to_string(attempts()) + " times";
        trace_.add("pipeline", "EXHAUSTED", std::string(phase_name(p)), out_.message);
        return finish();
    }

    PipelineOutcome stopped(const Stop& s) {
        registry_.restore(start_);
        out_.success = false;
        out_.error = s.code;
        out_.message = s.message;
        trace_.add("pipeline", "ABORTED", std::string(code_name(s.code)), s.message);
        return finish();
    }

    PipelineOutcome done() {
        out_.phase_reached = Phase::done;
        out_.success = true;
        for (auto k : {ItemKind::tool, ItemKind::agent, ItemKind::workflow}) {
            const auto& prev = before_[static_cast<int>(k)];
            for (const auto& n : registry_.list_items(k)) {
                if (!std::binary_search(prev.begin(), prev.end(), n)) out_.artifacts.push_back(n);
            }
        }
        trace_.add("pipeline", "DONE", {}, join(out_.artifacts, ", "));
        return finish();
    }

    Registry& registry() { return registry_; }
    const ToolRunner& runner() { return runner_; }
    const PipelineConfig& config() { return config_; }

private:
    PipelineOutcome finish() {
        out_.trace = trace_.records();
        return std::move(out_);
    }

    Registry& registry_;
    const ToolRunner& runner_;
    const PipelineConfig& config_;
    RegistrySnapshot start_;
    std::vector<std::string> before_[3];
    PipelineOutcome out_;
    TraceLog trace_;
};

AgentDefinition or_default(const AgentDefinition& a, AgentDefinition (*fallback)()) {
    return a.name.empty() ? fallback() : a;
}

// Outcome of the editor's last run_tool test for `tool`, if any.
std::optional<ToolResult> last_test(const Context& ctx, const std::string& tool) {
    std::optional<ToolResult> found;
    for (const auto& t : ctx.turns()) {
        if (!t.tool_call || t.tool_call->tool_name != "run_tool" || !t.observation) continue;
        auto it = t.tool_call->arguments.find("name");
        if (it != t.tool_call->arguments.end() && it->second == tool) found = t.observation;
    }
    return found;
}

std::string describe_agent(const AgentSpec& a) {
    std::vector<std::string> tools;
    for (const auto& t : a.tools_existing) tools.push_back(t.name);
    for (const auto& t : a.tools_new) tools.push_back(t.name);
    return "Agent: " + a.name + "\nDescription: " + a.description + "\nInstructions: " + a.instructions +
           "\nTools: " + (tools.empty() ? "(none)" : join(tools, ", ")) + "\n";
}

}  // namespace

std::vector<Diagnostic> check_agent_form_text(const std::string& reply, const RegistryView* registry, AgentForm* out) {
    AgentForm form;
    try {
        form = parse_agent_form(extract_form(reply, "agents"));
    } catch (const Error& e) {
        return read_error(e);
    }
    auto diags = validate_agent_form(form, registry);
    if (out) *out = std::move(form);
    return diags;
}

std::vector<Diagnostic> check_workflow_form_text(const std::string& reply, const RegistryView* registry,
                                                 WorkflowForm* out) {
    WorkflowForm form;
    try {
        form = parse_workflow_form(extract_form(reply, "workflow"));
    } catch (const Error& e) {
        return read_error(e);
    }
    auto diags = validate_workflow_form(form, registry);
    if (out) *out = std::move(form);
    return diags;
}

PipelineOutcome run_agent_creation_pipeline(const std::string& requirements, Registry& registry,
                                            const ToolRunner& runner, const std::optional<std::string>& task,
                                            const PipelineConfig& config) {
    Pipeline p(registry, runner, config);
    try {
        const auto form = p.profile<AgentForm>(or_default(config.profiling_agent, agent_profiling_agent), requirements,
                                               kAgentProfilingTag, check_agent_form_text);
        if (!form) return p.exhausted(Phase::profiling);

        // Tools, each tested on its own.
        std::vector<std::pair<ToolRef, std::string>> new_tools;  // tool, owning agent
        std::set<std::string> seen;
        for (const auto& a : form->agents) {
            for (const auto& t : a.tools_new) {
                if (seen.insert(t.name).second) new_tools.emplace_back(t, a.name);
            }
        }
        if (!new_tools.empty()) {
            p.phase(Phase::tools);
            const AgentDefinition editor = or_default(config.tool_editor_agent, tool_editor_agent);
            for (const auto& [tool, owner] : new_tools) {
                const RegistrySnapshot before = registry.snapshot();
                std::string request = "Create the tool `" + tool.name + "`: " + tool.description +
                                      "\nIt will be used by " + owner + ". Test it with run_tool before finishing.";
                bool ok = false;
                for (int n = 1; n <= p.attempts() && !ok; ++n) {
                    p.attempt(Phase::tools, n);
                    if (n > 1) p.restore_to(before);
                    const AgentRunOutcome r = p.edit(editor, request, kToolEditorTag);
                    std::string why;
                    if (!registry.has_tool(tool.name)) {
                        why = "tool " + tool.name + " was not registered";
                    } else if (auto test = last_test(r.context, tool.name); !test) {
                        why = "tool " + tool.name + " was never test-run";
                    } else if (!test->ok()) {
                        why = "test run of " + tool.name + " failed: " + test->error_kind.value_or("") + " " + test->payload;
                    } else {
                        ok = true;
                        p.success(Phase::tools, tool.name);
                        continue;
                    }
                    p.fail(Phase::tools, why);
                    request += "\n\nThe previous attempt did not succeed: " + why;
                }
                if (!ok) return p.exhausted(Phase::tools);
            }
        }

        // Agents.
        p.phase(Phase::agents);
        const AgentDefinition editor = or_default(config.agent_editor_agent, agent_editor_agent);
        std::string request = "Register these agents.\n\n";
        for (const auto& a : form->agents) request += describe_agent(a) + "\n";
        if (form->agents.size() > 1) {
            request += "There is more than one agent, so also create an orchestrator for them. Scenario: " +
                       collapse_whitespace(form->system_input) + "\n";
        }
        const RegistrySnapshot before = registry.snapshot();
        for (int n = 1; n <= p.attempts(); ++n) {
            p.attempt(Phase::agents, n);
            if (n > 1) p.restore_to(before);
            p.edit(editor, request, kAgentEditorTag);
            std::string why;
            std::string entry;
            for (const auto& a : form->agents) {
                if (!registry.has_agent(a.name)) {
                    why = "agent " + a.name + " was not registered";
                    break;
                }
            }
            if (why.empty() && form->agents.size() == 1) entry = form->agents.front().name;
            if (why.empty() && form->agents.size() > 1) {
                for (const auto& name : registry.list_items(ItemKind::agent)) {
                    const AgentDefinition d = registry.get_agent(name);
                    const bool covers = std::all_of(form->agents.begin(), form->agents.end(), [&](const AgentSpec& s) {
                        return std::find(d.transfer_targets.begin(), d.transfer_targets.end(), s.name) !=
                               d.transfer_targets.end();
                    });
                    if (covers) {
                        entry = name;
                        break;
                    }
                }
                if (entry.empty()) why = "no orchestrator links all agents";
            }
            if (why.empty() && task) {
                const AgentRunOutcome r = run_registered_agent(registry, runner, *config.engine, entry, *task, config.run_limits);
                for (const auto& t : r.context.turns()) p.out().transcript.append(t);
                if (r.kind == AgentRunOutcome::Kind::aborted && r.error && fatal_backend(*r.error)) throw Stop{*r.error, r.text};
                if (r.completed()) {
                    p.out().task_result = r.text;
                } else {
                    why = "running " + entry + " ended " + std::string(outcome_kind_name(r.kind)) + ": " + r.text;
                }
            }
            if (why.empty()) {
                p.success(Phase::agents, entry);
                return p.done();
            }
            p.fail(Phase::agents, why);
            request += "\nThe previous attempt did not succeed: " + why + "\n";
        }
        return p.exhausted(Phase::agents);
    } catch (const Stop& s) {
        return p.stopped(s);
    }
}

PipelineOutcome run_workflow_creation_pipeline(const std::string& requirements, Registry& registry,
                                               const ToolRunner& runner, const std::optional<std::string>& task,
                                               const PipelineConfig& config) {
    Pipeline p(registry, runner, config);
    try {
        const auto form = p.profile<WorkflowForm>(or_default(config.profiling_agent, workflow_profiling_agent),
                                                  requirements, kWorkflowProfilingTag, check_workflow_form_text);
        if (!form) return p.exhausted(Phase::profiling);

        p.phase(Phase::workflow);
        const AgentDefinition editor = or_default(config.workflow_editor_agent, workflow_editor_agent);
        std::vector<std::string> fresh;
        for (const auto& a : form->agents) {
            if (a.category == "new") fresh.push_back(a.name);
        }
        std::string request = "Register workflow " + form->name + ".\n";
        if (!fresh.empty()) request += "Agents to create first: " + join(fresh, ", ") + "\n";
        request += "\nForm:\n" + to_xml(*form);

        const RegistrySnapshot before = registry.snapshot();
        for (int n = 1; n <= p.attempts(); ++n) {
            p.attempt(Phase::workflow, n);
            if (n > 1) p.restore_to(before);
            p.edit(editor, request, kWorkflowEditorTag);
            std::string why;
            for (const auto& name : fresh) {
                if (!registry.has_agent(name)) {
                    why = "agent " + name + " was not registered";
                    break;
                }
            }
            if (why.empty() && !registry.has_workflow(form->name)) why = "workflow " + form->name + " was not registered";
            if (why.empty() && task) {
                WorkflowRunOptions opts = config.workflow_run;
                const WorkflowRunResult r =
                    run_registered_workflow(registry, runner, *config.engine, registry.get_workflow(form->name), *task, opts);
                if (r.terminal.code && fatal_backend(*r.terminal.code)) throw Stop{*r.terminal.code, r.terminal.reason};
                if (r.completed()) {
                    p.out().task_result = r.terminal.value;
                } else {
                    why = "running " + form->name + " aborted: " +
                          (r.terminal.code ? std::string(code_name(*r.terminal.code)) + " " : std::string()) +
                          r.terminal.reason;
                }
            }
            if (why.empty()) {
                p.success(Phase::workflow, form->name);
                return p.done();
            }
            p.fail(Phase::workflow, why);
            request += "\n\nThe previous attempt did not succeed: " + why;
        }
        return p.exhausted(Phase::workflow);
    } catch (const Stop& s) {
        return p.stopped(s);
    }
}

}  // namespace agentos

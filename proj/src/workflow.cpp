#include "agentos/workflow.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <mutex>
#include <sstream>

#include "agentos/text.hpp"

namespace agentos {

const Event& EventGraph::event(const std::string& name) const {
    const Event* e = form.find_event(name);
    if (!e) throw Error(ErrorCode::not_found, "no event named " + name);
    return *e;
}

std::set<std::string> EventGraph::forward_closure(const std::string& from) const {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        auto it = listen_edges.find(cur);
        if (it == listen_edges.end()) continue;
        for (const auto& n : it->second) {
            if (seen.insert(n).second) stack.push_back(n);
        }
    }
    return seen;
}

EventGraph compile_graph(const WorkflowForm& form) {
    const auto diags = validate_workflow_form(form, nullptr);
    if (!diags.empty()) {
        std::string codes;
        for (const auto& d : diags) codes += (codes.empty() ? "" : ", ") + d.code + " at " + d.path;
        throw Error(ErrorCode::invalid_form, "workflow " + form.name + " is not valid: " + codes);
    }

    EventGraph g;
    g.form = form;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        g.nodes.push_back(form.events[i].name);
        index[form.events[i].name] = i;
    }
    std::vector<int> indegree(form.events.size(), 0);
    for (const auto& e : form.events) {
        std::set<std::string> uniq(e.listen.begin(), e.listen.end());
        for (const auto& src : uniq) g.listen_edges[src].push_back(e.name);
        indegree[index[e.name]] = static_cast<int>(uniq.size());
        for (const auto& o : e.outputs) {
            if (o.action.type == ActionType::go_to) g.goto_edges.emplace_back(e.name, o.action.value);
        }
    }

    // Kahn's algorithm, lowest document index first.
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < indegree.size(); ++i) {
        if (indegree[i] == 0) ready.insert(i);
    }
    while (!ready.empty()) {
        const std::size_t i = *ready.begin();
        ready.erase(ready.begin());
        g.topo_order.push_back(form.events[i].name);
        for (const auto& n : g.listen_edges[form.events[i].name]) {
            if (--indegree[index[n]] == 0) ready.insert(index[n]);
        }
    }
    return g;
}

RunLimits effective_limits(const WorkflowForm& form, RunLimits limits) {
    for (const auto& g : form.global_variables) {
        if (g.key != "max_iterations") continue;
        try {
            const int v = std::stoi(trim(g.value));
            if (v >= 1) limits.max_iterations_per_goto_edge = v;
        } catch (const std::exception&) {
            // Non-numeric values leave the default in place.
        }
    }
    return limits;
}

RunState initial_state(const EventGraph& graph) {
    RunState s;
    for (const auto& n : graph.nodes) s.events[n] = EventState{};
    return s;
}

std::set<std::string> ready_set(const EventGraph& graph, const RunState& state) {
    std::set<std::string> out;
    for (const auto& n : graph.nodes) {
        if (state.events.at(n).status != EventStatus::pending) continue;
        const Event& e = graph.event(n);
        bool ok = std::all_of(e.listen.begin(), e.listen.end(), [&](const std::string& l) {
            auto it = state.events.find(l);
            return it != state.events.end() && it->second.status == EventStatus::completed;
        });
        if (ok) out.insert(n);
    }
    return out;
}

OutputSelection parse_output_selection(const std::string& text) {
    static constexpr std::string_view open = "<output=";
    static constexpr std::string_view close = "</output>";
    const auto at = text.find(open);
    if (at == std::string::npos) throw Error(ErrorCode::no_output, "reply selects no output");
    const auto gt = text.find('>', at + open.size());
    if (gt == std::string::npos) throw Error(ErrorCode::no_output, "unterminated output selection");
    const auto end = text.find(close, gt + 1);
    if (end == std::string::npos) throw Error(ErrorCode::no_output, "output selection is missing </output>");
    return OutputSelection{trim(std::string_view(text).substr(at + open.size(), gt - at - open.size())),
                           trim(std::string_view(text).substr(gt + 1, end - gt - 1))};
}

std::string render_event_prompt(const Event& event, const std::map<std::string, std::string>& inputs,
                                const std::map<std::string, std::string>& globals) {
    std::ostringstream p;
    p << (event.task ? substitute_globals(*event.task, globals) : "Handle the event " + event.name + ".") << "\n";
    if (!event.inputs.empty()) {
        p << "\nInputs:\n";
        for (const auto& in : event.inputs) {
            auto it = inputs.find(in.key);
            p << "<input=" << in.key << ">" << (it == inputs.end() ? "" : it->second) << "</input>\n";
        }
    }
    p << "\nDeclared outputs:\n";
    for (const auto& o : event.outputs) {
        p << "- " << o.key << ": " << o.description;
        if (o.condition) p << " (choose when: " << *o.condition << ")";
        p << "\n";
    }
    p << "\nEnd your reply with exactly one <output=KEY>VALUE</output>, where KEY is one of the declared outputs.";
    return p.str();
}

OutputSelection execute_event(const Event& event, const std::map<std::string, std::string>& inputs,
                              const AgentDefinition& agent, Engine& engine, ToolHost& tools,
                              const std::map<std::string, std::string>& globals, const EventRunOptions& opts) {
    const std::string prompt = render_event_prompt(event, inputs, globals);
    AgentDefinition resolved = agent;
    resolved.instructions = substitute_globals(agent.instructions, globals);
    const std::string tag = opts.tag.empty() ? event.name : opts.tag;

    std::optional<Error> last;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string task = prompt;
        if (last) task += "\n\nYour previous reply was rejected (" + std::string(last->what()) + "). Try again.";
        AgentRunOutcome out = run_agent_loop(resolved, task, Context{}, engine, tools, opts.loop, tag);
        if (!out.completed()) {
            throw Error(out.error.value_or(ErrorCode::no_output),
                        event.name + ": agent run ended " + std::string(outcome_kind_name(out.kind)) + ": " + out.text);
        }
        try {
            OutputSelection sel = parse_output_selection(out.text);
            bool declared = std::any_of(event.outputs.begin(), event.outputs.end(),
                                        [&](const Output& o) { return o.key == sel.key; });
            if (declared) return sel;
            last = Error(ErrorCode::output_undeclared, event.name + " has no output named '" + sel.key + "'");
        } catch (const Error& e) {
            last = e;
        }
    }
    throw *last;
}

void apply_action(const EventGraph& graph, RunState& state, const std::string& event, const Output& chosen,
                  const std::string& value, const RunLimits& limits, TraceLog* trace) {
    EventState& es = state.events.at(event);
    auto unpublish = [&](EventState& s) {
        for (const auto& k : s.published) state.blackboard.erase(k);
        s.published.clear();
    };

    switch (chosen.action.type) {
        case ActionType::result:
            state.blackboard[chosen.key] = value;
            if (std::find(es.published.begin(), es.published.end(), chosen.key) == es.published.end()) {
                es.published.push_back(chosen.key);
            }
            es.status = EventStatus::completed;
            es.output_key = chosen.key;
            if (trace) trace->add(event, "RESULT", chosen.key, value);
            return;

        case ActionType::abort:
            es.status = EventStatus::completed;
            es.output_key = chosen.key;
            state.terminal = RunTerminal{false, {}, event + " selected ABORT output " + chosen.key, std::nullopt};
            if (trace) trace->add(event, "ABORT", chosen.key, value);
            return;

        case ActionType::go_to: {
            const std::string& target = chosen.action.value;
            const int n = ++state.loop_counters[{event, target}];
            if (trace) trace->add(event, "GOTO", chosen.key, event + "->" + target + "=" + std::to_string(n));
            if (n > limits.max_iterations_per_goto_edge) {
                state.terminal = RunTerminal{false,
                                             {},
                                             "GOTO " + event + "->" + target + " exceeded " +
                                                 std::to_string(limits.max_iterations_per_goto_edge) + " iterations",
                                             ErrorCode::loop_limit};
                return;
            }
            const auto closure = graph.forward_closure(target);
            for (const auto& name : graph.topo_order) {
                if (!closure.count(name)) continue;
                EventState& r = state.events.at(name);
                unpublish(r);
                r.status = EventStatus::pending;
                r.output_key.clear();
                if (trace) trace->add(name, "RESET", "", "by " + event);
            }
            if (!closure.count(event)) {
                unpublish(es);
                es.status = EventStatus::completed;
                es.output_key = chosen.key;
            }
            return;
        }
    }
}

namespace {

struct Attempt {
    std::optional<OutputSelection> selection;
    std::optional<ErrorCode> code;
    std::string message;
};

AgentDefinition resolve_agent(const WorkflowForm& form, const EventAgent& ref, const AgentResolver& agents) {
    std::optional<AgentDefinition> def = agents ? agents(ref.name) : std::nullopt;
    if (!def) {
        const WorkflowAgent* decl = form.find_agent(ref.name);
        if (!decl) throw Error(ErrorCode::unknown_agent, "no agent named " + ref.name);
        def = AgentDefinition{};
        def->name = decl->name;
        def->description = decl->description;
        def->instructions = decl->description;
        if (decl->tools) {
            for (const auto& t : *decl->tools) def->tool_names.push_back(t.name);
        }
    }
    if (!ref.model.empty()) def->model = ref.model;
    return *def;
}

}  // namespace

WorkflowRunResult run_workflow(const WorkflowForm& form, const std::string& system_input, Engine& engine,
                               ToolHost& tools, const AgentResolver& agents, const WorkflowRunOptions& opts) {
    const EventGraph graph = compile_graph(form);
    const RunLimits limits = effective_limits(form, opts.limits);
    const auto globals = globals_map(form.global_variables);

    WorkflowRunResult result;
    RunState& state = result.state;
    state = initial_state(graph);
    TraceLog trace;
    std::atomic<long> clock{0};
    std::mutex exec_mutex;
    trace.add("workflow", "BEGIN", "", form.name);

    auto run_one = [&](const std::string& name) -> Attempt {
        const long start = ++clock;
        Attempt a;
        const Event& ev = graph.event(name);
        try {
            if (name == kStartEvent) {
                a.selection = OutputSelection{{}, system_input};
            } else {
                std::map<std::string, std::string> inputs;
                for (const auto& in : ev.inputs) inputs[in.key] = state.blackboard.at(in.key);
                const AgentDefinition agent = resolve_agent(form, *ev.agent, agents);
                EventRunOptions ro;
                ro.loop = opts.loop;
                a.selection = execute_event(ev, inputs, agent, engine, tools, globals, ro);
            }
        } catch (const Error& e) {
            a.code = e.code();
            a.message = e.what();
        } catch (const std::exception& e) {
            a.code = ErrorCode::backend;
            a.message = e.what();
        }
        const long end = ++clock;
        std::lock_guard lock(exec_mutex);
        result.executions.push_back({name, start, end});
        return a;
    };

    std::map<std::string, int> runs;
    while (!state.terminal) {
        const bool all_done = std::all_of(state.events.begin(), state.events.end(),
                                          [](const auto& kv) { return kv.second.status == EventStatus::completed; });
        if (all_done) {
            const std::string& key = form.system_output.at(0).key;
            auto it = state.blackboard.find(key);
            if (it == state.blackboard.end()) {
                state.terminal = RunTerminal{false, {}, "all events completed without publishing " + key,
                                             ErrorCode::missing_output};
            } else {
                state.terminal = RunTerminal{true, it->second, {}, std::nullopt};
            }
            break;
        }

        const auto ready = ready_set(graph, state);
        std::vector<std::string> runnable;
        for (const auto& n : graph.topo_order) {
            if (!ready.count(n)) continue;
            const Event& ev = graph.event(n);
            bool have = n == kStartEvent || std::all_of(ev.inputs.begin(), ev.inputs.end(), [&](const KeyDesc& in) {
                            return state.blackboard.count(in.key) > 0;
                        });
            if (have) runnable.push_back(n);
        }
        if (runnable.empty()) {
            std::string waiting;
            for (const auto& n : ready) waiting += (waiting.empty() ? "" : ", ") + n;
            state.terminal = RunTerminal{false, {}, "no ready event has all of its inputs (waiting: " + waiting + ")",
                                         ErrorCode::missing_input};
            break;
        }
        if (opts.parallelism == Parallelism::serial) runnable.resize(1);

        std::vector<std::string> batch;
        for (const auto& n : runnable) {
            if (state.executed >= limits.max_total_events) break;
            ++state.executed;
            state.events.at(n).status = EventStatus::running;
            trace.add(n, "START", "", "run=" + std::to_string(++runs[n]));
            batch.push_back(n);
        }
        if (batch.empty()) {
            state.terminal = RunTerminal{false, {},
                                         "executed " + std::to_string(state.executed) + " events, the limit is " +
                                             std::to_string(limits.max_total_events),
                                         ErrorCode::total_limit};
            break;
        }

        std::vector<Attempt> attempts;
        if (batch.size() == 1) {
            attempts.push_back(run_one(batch[0]));
        } else {
            std::vector<std::future<Attempt>> futures;
            for (const auto& n : batch) futures.push_back(std::async(std::launch::async, run_one, n));
            for (auto& f : futures) attempts.push_back(f.get());
        }

        for (std::size_t i = 0; i < batch.size() && !state.terminal; ++i) {
            const std::string& n = batch[i];
            const Attempt& a = attempts[i];
            if (state.events.at(n).status != EventStatus::running) {
                trace.add(n, "DISCARD", "", "reset while running");
                continue;
            }
            if (!a.selection) {
                trace.add(n, "FAIL", std::string(code_name(*a.code)), a.message);
                state.terminal = RunTerminal{false, {}, a.message, a.code};
                break;
            }
            const Event& ev = graph.event(n);
            if (n == kStartEvent) {
                for (const auto& o : ev.outputs) apply_action(graph, state, n, o, a.selection->value, limits, &trace);
                continue;
            }
            auto out = std::find_if(ev.outputs.begin(), ev.outputs.end(),
                                    [&](const Output& o) { return o.key == a.selection->key; });
            apply_action(graph, state, n, *out, a.selection->value, limits, &trace);
        }
    }

    // Events still marked running belonged to a batch cut short by the terminal.
    for (auto& [name, es] : state.events) {
        if (es.status == EventStatus::running) es.status = EventStatus::pending;
    }
    const RunTerminal& t = *state.terminal;
    if (t.completed) {
        trace.add("workflow", "COMPLETED", form.system_output.at(0).key, t.value);
    } else {
        trace.add("workflow", "ABORTED", t.code ? std::string(code_name(*t.code)) : "", t.reason);
    }
    result.terminal = t;
    result.trace = trace.records();
    std::sort(result.executions.begin(), result.executions.end(),
              [](const ExecutionRecord& a, const ExecutionRecord& b) { return a.start_seq < b.start_seq; });
    return result;
}

}  // namespace agentos

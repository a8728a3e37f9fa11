#include "agentos/forms.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "agentos/text.hpp"
#include "agentos/xml.hpp"

namespace agentos {

std::string_view action_type_name(ActionType t) {
    switch (t) {
        case ActionType::result: return "RESULT";
        case ActionType::abort: return "ABORT";
        case ActionType::go_to: return "GOTO";
    }
    return "RESULT";
}

const Event* WorkflowForm::find_event(std::string_view n) const {
    for (const auto& e : events) {
        if (e.name == n) return &e;
    }
    return nullptr;
}

const WorkflowAgent* WorkflowForm::find_agent(std::string_view n) const {
    for (const auto& a : agents) {
        if (a.name == n) return &a;
    }
    return nullptr;
}

FormError::FormError(ErrorCode code, std::string path, const std::string& reason)
    : Error(code, path + ": " + reason), path_(std::move(path)), reason_(reason) {}

namespace {

// ---------------------------------------------------------------- reading

[[noreturn]] void schema_error(const std::string& path, const std::string& reason) {
    throw FormError(ErrorCode::schema, path, reason);
}

// Child elements paired with their XML path. Repeating elements get a 1-based
// index among same-named siblings; singletons only get one when duplicated.
struct Child {
    const XmlNode* node;
    std::string path;
};

std::vector<Child> children_of(const XmlNode& node, const std::string& path,
                               const std::set<std::string>& repeated) {
    std::map<std::string, int> seen;
    std::vector<Child> out;
    for (const auto& c : node.children) {
        const int k = ++seen[c.name];
        std::string p = path + "/" + c.name;
        if (repeated.count(c.name) || k > 1) p += "[" + std::to_string(k) + "]";
        out.push_back({&c, std::move(p)});
    }
    return out;
}

// Enforces the allowed child names and at most one of each singleton.
void check_children(const std::vector<Child>& kids, const std::set<std::string>& singletons,
                    const std::set<std::string>& repeated) {
    std::set<std::string> once;
    for (const auto& k : kids) {
        const std::string& n = k.node->name;
        if (repeated.count(n)) continue;
        if (!singletons.count(n)) schema_error(k.path, "unexpected element <" + n + ">");
        if (!once.insert(n).second) schema_error(k.path, "duplicate element <" + n + ">");
    }
}

const Child* find(const std::vector<Child>& kids, std::string_view name) {
    for (const auto& k : kids) {
        if (k.node->name == name) return &k;
    }
    return nullptr;
}

const Child& require(const std::vector<Child>& kids, const std::string& parent_path, const std::string& name) {
    const Child* c = find(kids, name);
    if (!c) schema_error(parent_path, "missing <" + name + ">");
    return *c;
}

std::string leaf_text(const Child& c) {
    if (!c.node->children.empty()) {
        const auto& first = c.node->children.front();
        schema_error(c.path + "/" + first.name, "unexpected element <" + first.name + "> in text field");
    }
    return trim(c.node->text);
}

// <key>/<description> sequences; pairs are formed positionally.
std::vector<KeyDesc> read_pairs(const Child& c) {
    auto kids = children_of(*c.node, c.path, {"key", "description"});
    check_children(kids, {}, {"key", "description"});
    std::vector<std::string> keys, descs;
    for (const auto& k : kids) {
        (k.node->name == "key" ? keys : descs).push_back(leaf_text(k));
    }
    if (keys.size() != descs.size()) {
        schema_error(c.path, "has " + std::to_string(keys.size()) + " <key> but " + std::to_string(descs.size()) +
                                 " <description> elements");
    }
    std::vector<KeyDesc> out;
    for (std::size_t i = 0; i < keys.size(); ++i) out.push_back({keys[i], descs[i]});
    return out;
}

std::vector<GlobalVariable> read_globals(const Child& c) {
    auto kids = children_of(*c.node, c.path, {"variable"});
    check_children(kids, {}, {"variable"});
    std::vector<GlobalVariable> out;
    for (const auto& v : kids) {
        auto vk = children_of(*v.node, v.path, {});
        check_children(vk, {"key", "description", "value"}, {});
        GlobalVariable g;
        g.key = leaf_text(require(vk, v.path, "key"));
        if (const Child* d = find(vk, "description")) g.description = leaf_text(*d);
        g.value = leaf_text(require(vk, v.path, "value"));
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<ToolRef> read_tools(const Child& c) {
    auto kids = children_of(*c.node, c.path, {"tool"});
    check_children(kids, {}, {"tool"});
    std::vector<ToolRef> out;
    for (const auto& t : kids) {
        auto tk = children_of(*t.node, t.path, {});
        check_children(tk, {"name", "description"}, {});
        ToolRef r;
        r.name = leaf_text(require(tk, t.path, "name"));
        if (const Child* d = find(tk, "description")) r.description = leaf_text(*d);
        out.push_back(std::move(r));
    }
    return out;
}

XmlNode parse_root(std::string_view xml, std::string_view expected) {
    XmlNode root = [&] {
        try {
            return parse_xml(xml);
        } catch (const Error& e) {
            throw FormError(ErrorCode::xml, "/", e.what());
        }
    }();
    if (root.name != expected) {
        schema_error("/" + root.name, "root element must be <" + std::string(expected) + ">");
    }
    return root;
}

AgentSpec read_agent_spec(const Child& c) {
    auto kids = children_of(*c.node, c.path, {"tools"});
    check_children(kids, {"name", "description", "instructions", "agent_input", "agent_output"}, {"tools"});
    AgentSpec a;
    a.name = leaf_text(require(kids, c.path, "name"));
    a.description = leaf_text(require(kids, c.path, "description"));
    a.instructions = leaf_text(require(kids, c.path, "instructions"));
    for (const auto& k : kids) {
        if (k.node->name != "tools") continue;
        auto cat = k.node->attribute("category");
        if (!cat) schema_error(k.path, "missing category attribute");
        auto list = read_tools(k);
        if (*cat == "existing") {
            a.tools_existing.insert(a.tools_existing.end(), list.begin(), list.end());
        } else if (*cat == "new") {
            a.tools_new.insert(a.tools_new.end(), list.begin(), list.end());
        } else {
            schema_error(k.path, "category must be \"existing\" or \"new\"");
        }
    }
    a.agent_input = read_pairs(require(kids, c.path, "agent_input"));
    a.agent_output = read_pairs(require(kids, c.path, "agent_output"));
    return a;
}

ActionType read_action_type(const Child& c) {
    const std::string t = leaf_text(c);
    if (t == "RESULT") return ActionType::result;
    if (t == "ABORT") return ActionType::abort;
    if (t == "GOTO") return ActionType::go_to;
    throw FormError(ErrorCode::action_type, c.path, "unknown action type '" + t + "'");
}

Output read_output(const Child& c) {
    auto kids = children_of(*c.node, c.path, {});
    check_children(kids, {"key", "description", "condition", "action"}, {});
    Output o;
    o.key = leaf_text(require(kids, c.path, "key"));
    if (const Child* d = find(kids, "description")) o.description = leaf_text(*d);
    if (const Child* cond = find(kids, "condition")) o.condition = leaf_text(*cond);
    const Child& act = require(kids, c.path, "action");
    auto ak = children_of(*act.node, act.path, {});
    check_children(ak, {"type", "value"}, {});
    o.action.type = read_action_type(require(ak, act.path, "type"));
    if (const Child* v = find(ak, "value")) o.action.value = leaf_text(*v);
    return o;
}

Event read_event(const Child& c) {
    auto kids = children_of(*c.node, c.path, {});
    check_children(kids, {"name", "inputs", "task", "outputs", "listen", "agent"}, {});
    Event e;
    e.name = leaf_text(require(kids, c.path, "name"));
    if (const Child* in = find(kids, "inputs")) {
        auto ik = children_of(*in->node, in->path, {"input"});
        check_children(ik, {}, {"input"});
        for (const auto& i : ik) {
            auto pairs = read_pairs(i);
            if (pairs.size() != 1) schema_error(i.path, "an input holds exactly one key and description");
            e.inputs.push_back(std::move(pairs.front()));
        }
    }
    if (const Child* t = find(kids, "task")) e.task = leaf_text(*t);
    if (const Child* out = find(kids, "outputs")) {
        auto ok = children_of(*out->node, out->path, {"output"});
        check_children(ok, {}, {"output"});
        for (const auto& o : ok) e.outputs.push_back(read_output(o));
    }
    if (const Child* l = find(kids, "listen")) {
        auto lk = children_of(*l->node, l->path, {"event"});
        check_children(lk, {}, {"event"});
        for (const auto& ev : lk) e.listen.push_back(leaf_text(ev));
    }
    if (const Child* ag = find(kids, "agent")) {
        auto gk = children_of(*ag->node, ag->path, {});
        check_children(gk, {"name", "model"}, {});
        EventAgent a;
        a.name = leaf_text(require(gk, ag->path, "name"));
        if (const Child* m = find(gk, "model")) a.model = leaf_text(*m);
        e.agent = std::move(a);
    }
    return e;
}

}  // namespace

AgentForm parse_agent_form(std::string_view xml) {
    const XmlNode root = parse_root(xml, "agents");
    const std::string path = "/agents";
    auto kids = children_of(root, path, {"agent"});
    check_children(kids, {"system_input", "system_output", "global_variables"}, {"agent"});

    AgentForm form;
    form.system_input = leaf_text(require(kids, path, "system_input"));
    form.system_output = read_pairs(require(kids, path, "system_output"));
    if (const Child* g = find(kids, "global_variables")) form.global_variables = read_globals(*g);
    for (const auto& k : kids) {
        if (k.node->name == "agent") form.agents.push_back(read_agent_spec(k));
    }
    if (form.agents.empty()) schema_error(path, "missing <agent>");
    return form;
}

WorkflowForm parse_workflow_form(std::string_view xml) {
    const XmlNode root = parse_root(xml, "workflow");
    const std::string path = "/workflow";
    auto kids = children_of(root, path, {});
    check_children(kids, {"name", "system_input", "system_output", "agents", "global_variables", "events"}, {});

    WorkflowForm form;
    form.name = leaf_text(require(kids, path, "name"));
    form.system_input = read_pairs(require(kids, path, "system_input"));
    form.system_output = read_pairs(require(kids, path, "system_output"));
    if (const Child* ags = find(kids, "agents")) {
        auto ak = children_of(*ags->node, ags->path, {"agent"});
        check_children(ak, {}, {"agent"});
        for (const auto& a : ak) {
            auto fk = children_of(*a.node, a.path, {});
            check_children(fk, {"name", "description", "tools"}, {});
            WorkflowAgent wa;
            auto cat = a.node->attribute("category");
            if (!cat || (*cat != "existing" && *cat != "new")) {
                schema_error(a.path, "category must be \"existing\" or \"new\"");
            }
            wa.category = *cat;
            wa.name = leaf_text(require(fk, a.path, "name"));
            if (const Child* d = find(fk, "description")) wa.description = leaf_text(*d);
            if (const Child* t = find(fk, "tools")) wa.tools = read_tools(*t);
            form.agents.push_back(std::move(wa));
        }
    }
    if (const Child* g = find(kids, "global_variables")) form.global_variables = read_globals(*g);
    const Child& evs = require(kids, path, "events");
    auto ek = children_of(*evs.node, evs.path, {"event"});
    check_children(ek, {}, {"event"});
    for (const auto& e : ek) form.events.push_back(read_event(e));
    return form;
}

// ---------------------------------------------------------------- writing

namespace {

class XmlWriter {
public:
    void open(const std::string& tag, const std::string& attrs = {}) {
        line("<" + tag + attrs + ">");
        ++depth_;
    }
    void close(const std::string& tag) {
        --depth_;
        line("</" + tag + ">");
    }
    void leaf(const std::string& tag, const std::string& text) {
        line("<" + tag + ">" + xml_escape(text) + "</" + tag + ">");
    }
    void pair(const KeyDesc& kd) {
        leaf("key", kd.key);
        leaf("description", kd.description);
    }
    void pairs(const std::string& tag, const std::vector<KeyDesc>& list) {
        open(tag);
        for (const auto& kd : list) pair(kd);
        close(tag);
    }
    void globals(const std::vector<GlobalVariable>& vars) {
        if (vars.empty()) return;
        open("global_variables");
        for (const auto& v : vars) {
            open("variable");
            leaf("key", v.key);
            leaf("description", v.description);
            leaf("value", v.value);
            close("variable");
        }
        close("global_variables");
    }
    void tools(const std::vector<ToolRef>& list, const std::string& attrs = {}) {
        open("tools", attrs);
        for (const auto& t : list) {
            open("tool");
            leaf("name", t.name);
            leaf("description", t.description);
            close("tool");
        }
        close("tools");
    }
    std::string str() const { return out_.str(); }

private:
    void line(const std::string& s) { out_ << std::string(static_cast<std::size_t>(depth_) * 4, ' ') << s << '\n'; }
    std::ostringstream out_;
    int depth_ = 0;
};

}  // namespace

std::string to_xml(const AgentForm& form) {
    XmlWriter w;
    w.open("agents");
    w.leaf("system_input", form.system_input);
    w.pairs("system_output", form.system_output);
    w.globals(form.global_variables);
    for (const auto& a : form.agents) {
        w.open("agent");
        w.leaf("name", a.name);
        w.leaf("description", a.description);
        w.leaf("instructions", a.instructions);
        if (!a.tools_existing.empty()) w.tools(a.tools_existing, " category=\"existing\"");
        if (!a.tools_new.empty()) w.tools(a.tools_new, " category=\"new\"");
        w.pairs("agent_input", a.agent_input);
        w.pairs("agent_output", a.agent_output);
        w.close("agent");
    }
    w.close("agents");
    return w.str();
}

std::string to_xml(const WorkflowForm& form) {
    XmlWriter w;
    w.open("workflow");
    w.leaf("name", form.name);
    w.pairs("system_input", form.system_input);
    w.pairs("system_output", form.system_output);
    w.open("agents");
    for (const auto& a : form.agents) {
        w.open("agent", " category=\"" + xml_escape(a.category) + "\"");
        w.leaf("name", a.name);
        w.leaf("description", a.description);
        if (a.tools) w.tools(*a.tools);
        w.close("agent");
    }
    w.close("agents");
    w.globals(form.global_variables);
    w.open("events");
    for (const auto& e : form.events) {
        w.open("event");
        w.leaf("name", e.name);
        if (!e.inputs.empty()) {
            w.open("inputs");
            for (const auto& in : e.inputs) {
                w.open("input");
                w.pair(in);
                w.close("input");
            }
            w.close("inputs");
        }
        if (e.task) w.leaf("task", *e.task);
        if (!e.outputs.empty()) {
            w.open("outputs");
            for (const auto& o : e.outputs) {
                w.open("output");
                w.leaf("key", o.key);
                w.leaf("description", o.description);
                if (o.condition) w.leaf("condition", *o.condition);
                w.open("action");
                w.leaf("type", std::string(action_type_name(o.action.type)));
                if (!o.action.value.empty()) w.leaf("value", o.action.value);
                w.close("action");
                w.close("output");
            }
            w.close("outputs");
        }
        if (!e.listen.empty()) {
            w.open("listen");
            for (const auto& l : e.listen) w.leaf("event", l);
            w.close("listen");
        }
        if (e.agent) {
            w.open("agent");
            w.leaf("name", e.agent->name);
            if (!e.agent->model.empty()) w.leaf("model", e.agent->model);
            w.close("agent");
        }
        w.close("event");
    }
    w.close("events");
    w.close("workflow");
    return w.str();
}

// ---------------------------------------------------------------- globals

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> keys;
    std::size_t i = 0;
    while (i < text.size()) {
        if (starts_with_at(text, i, "{{") || starts_with_at(text, i, "}}")) {
            i += 2;
            continue;
        }
        if (text[i] == '{') {
            const std::size_t close = text.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string_view key = text.substr(i + 1, close - i - 1);
                if (is_identifier(key)) {
                    keys.emplace_back(key);
                    i = close + 1;
                    continue;
                }
            }
        }
        ++i;
    }
    return keys;
}

std::map<std::string, std::string> globals_map(const std::vector<GlobalVariable>& globals) {
    std::map<std::string, std::string> out;
    for (const auto& g : globals) out.emplace(g.key, g.value);
    return out;
}

std::string substitute_globals(std::string_view text, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (starts_with_at(text, i, "{{")) {
            out.push_back('{');
            i += 2;
            continue;
        }
        if (starts_with_at(text, i, "}}")) {
            out.push_back('}');
            i += 2;
            continue;
        }
        if (text[i] == '{') {
            const std::size_t close = text.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string key(text.substr(i + 1, close - i - 1));
                if (is_identifier(key)) {
                    auto it = values.find(key);
                    if (it == values.end()) throw Error(ErrorCode::unbound, "no value for {" + key + "}");
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------- validation

namespace {

std::string at(const std::string& base, const std::string& elem, std::size_t index) {
    return base + "/" + elem + "[" + std::to_string(index + 1) + "]";
}

std::set<std::string> global_keys(const std::vector<GlobalVariable>& vars) {
    std::set<std::string> out;
    for (const auto& v : vars) out.insert(v.key);
    return out;
}

}  // namespace

std::vector<Diagnostic> validate_agent_form(const AgentForm& form, const RegistryView* registry) {
    std::vector<Diagnostic> out;
    auto emit = [&](const char* code, std::string msg, std::string path) {
        out.push_back({code, std::move(msg), std::move(path)});
    };
    const std::string root = "/agents";
    const auto globals = global_keys(form.global_variables);

    // A1
    if (form.system_output.size() != 1) {
        emit("A1", "system_output holds " + std::to_string(form.system_output.size()) + " key pairs, expected 1",
             root + "/system_output");
    }
    for (std::size_t i = 0; i < form.agents.size(); ++i) {
        const auto& a = form.agents[i];
        const std::string p = at(root, "agent", i);
        if (a.agent_input.size() != 1) {
            emit("A1", a.name + ": agent_input holds " + std::to_string(a.agent_input.size()) + " key pairs",
                 p + "/agent_input");
        }
        if (a.agent_output.size() != 1) {
            emit("A1", a.name + ": agent_output holds " + std::to_string(a.agent_output.size()) + " key pairs",
                 p + "/agent_output");
        }
    }
    // A2
    for (std::size_t i = 0; i < form.agents.size(); ++i) {
        for (const auto& key : placeholders(form.agents[i].instructions)) {
            if (!globals.count(key)) {
                emit("A2", form.agents[i].name + ": instructions reference {" + key + "} but no such global variable",
                     at(root, "agent", i) + "/instructions");
            }
        }
    }
    // A3
    if (registry) {
        for (std::size_t i = 0; i < form.agents.size(); ++i) {
            const auto& tools = form.agents[i].tools_existing;
            for (std::size_t t = 0; t < tools.size(); ++t) {
                if (!registry->has_tool(tools[t].name)) {
                    emit("A3", "existing tool " + tools[t].name + " is not in the registry",
                         at(at(root, "agent", i) + "/tools", "tool", t));
                }
            }
        }
    }
    // A4
    std::set<std::string> names;
    for (std::size_t i = 0; i < form.agents.size(); ++i) {
        if (!names.insert(form.agents[i].name).second) {
            emit("A4", "agent name " + form.agents[i].name + " is used more than once", at(root, "agent", i) + "/name");
        }
    }
    // A5
    if (form.agents.size() == 1 && form.system_output.size() == 1 && form.agents[0].agent_output.size() == 1 &&
        form.system_output[0].key != form.agents[0].agent_output[0].key) {
        emit("A5",
             "single-agent form: system_output key " + form.system_output[0].key + " differs from agent_output key " +
                 form.agents[0].agent_output[0].key,
             root + "/system_output/key");
    }
    return out;
}

std::vector<Diagnostic> validate_workflow_form(const WorkflowForm& form, const RegistryView* registry) {
    std::vector<Diagnostic> out;
    auto emit = [&](const char* code, std::string msg, std::string path) {
        out.push_back({code, std::move(msg), std::move(path)});
    };
    const std::string root = "/workflow";
    const std::string events_path = root + "/events";
    auto ev_path = [&](std::size_t i) { return at(events_path, "event", i); };

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < form.events.size(); ++i) index.emplace(form.events[i].name, i);
    const bool single_in = form.system_input.size() == 1;
    const bool single_out = form.system_output.size() == 1;
    const std::string in_key = single_in ? form.system_input[0].key : std::string();

    // V1
    if (!is_identifier(form.name)) {
        emit("V1", "workflow name '" + form.name + "' is not a single underscore-separated token", root + "/name");
    } else if (registry && registry->has_workflow(form.name)) {
        emit("V1", "a workflow named " + form.name + " already exists", root + "/name");
    }

    // V2
    if (form.events.empty() || form.events[0].name != kStartEvent) {
        emit("V2", "the first event must be on_start",
             form.events.empty() ? events_path : ev_path(0) + "/name");
    }
    for (std::size_t i = 1; i < form.events.size(); ++i) {
        if (form.events[i].name == kStartEvent) emit("V2", "on_start must appear only as the first event", ev_path(i));
    }
    if (!form.events.empty() && form.events[0].name == kStartEvent) {
        const Event& s = form.events[0];
        const std::string p = ev_path(0);
        if (s.agent) emit("V2", "on_start must not have an agent", p + "/agent");
        if (s.task) emit("V2", "on_start must not have a task", p + "/task");
        if (!s.listen.empty()) emit("V2", "on_start must not listen to events", p + "/listen");
        std::set<std::string> ins, outs;
        for (const auto& in : s.inputs) ins.insert(in.key);
        for (const auto& o : s.outputs) outs.insert(o.key);
        if (single_in && ins != std::set<std::string>{in_key}) {
            emit("V2", "on_start inputs must be exactly the system_input key " + in_key, p + "/inputs");
        }
        bool all_result = std::all_of(s.outputs.begin(), s.outputs.end(),
                                      [](const Output& o) { return o.action.type == ActionType::result; });
        if (outs != ins || !all_result) {
            emit("V2", "on_start outputs must pass its inputs through as RESULT outputs", p + "/outputs");
        }
    }

    // Forward listen edges: source -> events listening to it.
    std::map<std::string, std::vector<std::string>> listeners;
    for (const auto& e : form.events) {
        for (const auto& l : e.listen) listeners[l].push_back(e.name);
    }
    auto descendants = [&](const std::string& from) {
        std::set<std::string> seen;
        std::vector<std::string> stack{from};
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            for (const auto& n : listeners[cur]) {
                if (seen.insert(n).second) stack.push_back(n);
            }
        }
        return seen;
    };

    // V3
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        const Event& e = form.events[i];
        if (e.name == kStartEvent) continue;
        const auto below = descendants(e.name);
        for (std::size_t k = 0; k < e.inputs.size(); ++k) {
            const std::string& key = e.inputs[k].key;
            if (single_in && key == in_key) continue;
            bool published = false;
            for (const auto& p : form.events) {
                if (p.name == e.name || below.count(p.name)) continue;
                for (const auto& o : p.outputs) {
                    if (o.action.type == ActionType::result && o.key == key) published = true;
                }
            }
            if (!published) {
                emit("V3", e.name + ": input " + key + " is not published by any event that can run before it",
                     at(ev_path(i) + "/inputs", "input", k));
            }
        }
    }

    // V4
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        const Event& e = form.events[i];
        if (e.name == kStartEvent) continue;
        if (e.listen.empty()) emit("V4", e.name + " listens to no event", ev_path(i));
        if (!e.agent) emit("V4", e.name + " has no agent", ev_path(i));
    }

    // V5
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        const Event& e = form.events[i];
        for (std::size_t k = 0; k < e.outputs.size(); ++k) {
            const Output& o = e.outputs[k];
            if (o.action.type != ActionType::go_to) continue;
            const std::string p = at(ev_path(i) + "/outputs", "output", k) + "/action";
            const Event* target = form.find_event(o.action.value);
            if (!target) {
                emit("V5", e.name + ": GOTO target '" + o.action.value + "' is not an event", p);
            } else if (std::find(target->listen.begin(), target->listen.end(), e.name) != target->listen.end()) {
                emit("V5", e.name + ": GOTO target " + target->name + " listens to " + e.name, p);
            }
        }
    }

    // V6
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        const Event& e = form.events[i];
        if (e.outputs.empty()) {
            emit("V6", e.name + " declares no outputs", ev_path(i));
            continue;
        }
        if (e.outputs.size() < 2) continue;
        int results = 0;
        for (std::size_t k = 0; k < e.outputs.size(); ++k) {
            const Output& o = e.outputs[k];
            if (!o.condition || o.condition->empty()) {
                emit("V6", e.name + ": output " + o.key + " needs a condition",
                     at(ev_path(i) + "/outputs", "output", k));
            }
            if (o.action.type == ActionType::result) ++results;
        }
        if (results > 1) emit("V6", e.name + " has more than one RESULT output", ev_path(i) + "/outputs");
    }

    // V7
    if (single_out) {
        const std::string& key = form.system_output[0].key;
        bool found = false;
        for (const auto& e : form.events) {
            for (const auto& o : e.outputs) {
                if (o.action.type == ActionType::result && o.key == key) found = true;
            }
        }
        if (!found) emit("V7", "no RESULT output publishes the system_output key " + key, root + "/system_output/key");
    }

    // V8
    for (std::size_t i = 0; i < form.agents.size(); ++i) {
        const auto& a = form.agents[i];
        if (registry && a.category == "existing" && !registry->has_agent(a.name)) {
            emit("V8", "existing agent " + a.name + " is not in the registry", at(root + "/agents", "agent", i));
        }
    }
    const auto globals = global_keys(form.global_variables);
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        const Event& e = form.events[i];
        if (e.agent && !form.find_agent(e.agent->name) && registry && !registry->has_agent(e.agent->name)) {
            emit("V8", e.name + ": agent " + e.agent->name + " is neither declared nor registered",
                 ev_path(i) + "/agent/name");
        }
        if (e.task) {
            for (const auto& key : placeholders(*e.task)) {
                if (!globals.count(key)) {
                    emit("V8", e.name + ": task references {" + key + "} but no such global variable",
                         ev_path(i) + "/task");
                }
            }
        }
    }

    // V9
    if (!single_in) {
        emit("V9", "system_input holds " + std::to_string(form.system_input.size()) + " key pairs, expected 1",
             root + "/system_input");
    }
    if (!single_out) {
        emit("V9", "system_output holds " + std::to_string(form.system_output.size()) + " key pairs, expected 1",
             root + "/system_output");
    }

    // V10
    std::set<std::string> dup;
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        if (index.at(form.events[i].name) != i && dup.insert(form.events[i].name).second) {
            emit("V10", "event name " + form.events[i].name + " is used more than once", ev_path(i) + "/name");
        }
        for (std::size_t k = 0; k < form.events[i].listen.size(); ++k) {
            if (!index.count(form.events[i].listen[k])) {
                emit("V10", form.events[i].name + " listens to unknown event " + form.events[i].listen[k],
                     at(ev_path(i) + "/listen", "event", k));
            }
        }
    }
    // Cycle check by DFS colouring in document order; reports the event that closes a cycle.
    std::map<std::string, int> colour;
    std::function<bool(const std::string&)> dfs = [&](const std::string& n) -> bool {
        colour[n] = 1;
        for (const auto& m : listeners[n]) {
            if (colour[m] == 1) return true;
            if (colour[m] == 0 && dfs(m)) return true;
        }
        colour[n] = 2;
        return false;
    };
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        if (colour[form.events[i].name] == 0 && dfs(form.events[i].name)) {
            emit("V10", "the listen graph has a cycle through " + form.events[i].name, ev_path(i) + "/listen");
            break;
        }
    }
    return out;
}

std::vector<Diagnostic> lint_workflow_form(const WorkflowForm& form) {
    std::vector<Diagnostic> out;
    for (std::size_t i = 0; i < form.events.size(); ++i) {
        const Event& e = form.events[i];
        if (e.outputs.size() == 1 && e.outputs[0].action.type == ActionType::go_to) {
            out.push_back({"W1", e.name + ": its only output is a GOTO, so it can never publish a result",
                           at("/workflow/events", "event", i) + "/outputs/output[1]"});
        }
    }
    return out;
}

}  // namespace agentos

#include "agentos/registry.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "agentos/error.hpp"

namespace agentos {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kHeader = "agentos-def 1";

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& p, const std::string& bytes) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
        out << bytes;
        out.flush();
        if (!out) throw Error(ErrorCode::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw Error(ErrorCode::io, "cannot replace " + p.string() + ": " + ec.message());
}

StoredItem decode_item(const std::string& bytes, const fs::path& p) {
    if (bytes.compare(0, kHeader.size(), kHeader) != 0) {
        throw Error(ErrorCode::io, p.string() + " lacks the agentos-def header");
    }
    const auto nl = bytes.find('\n');
    auto j = json::parse(nl == std::string::npos ? std::string() : bytes.substr(nl + 1), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::io, p.string() + " holds malformed JSON");
    StoredItem s;
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.name = j.at("name").get<std::string>();
    s.version = j.at("version").get<int>();
    s.created_at = j.value("created_at", "");
    s.definition = j.at("definition");
    return s;
}

}  // namespace

std::string_view kind_name(ItemKind k) {
    switch (k) {
        case ItemKind::tool: return "tool";
        case ItemKind::agent: return "agent";
        case ItemKind::workflow: return "workflow";
    }
    return "tool";
}

ItemKind parse_kind(std::string_view s) {
    if (s == "tool" || s == "tools") return ItemKind::tool;
    if (s == "agent" || s == "agents") return ItemKind::agent;
    if (s == "workflow" || s == "workflows") return ItemKind::workflow;
    throw Error(ErrorCode::usage, "unknown item kind '" + std::string(s) + "'");
}

ToolDefinition ToolDefinition::builtin(const ToolSchema& schema, std::string primitive) {
    ToolDefinition t;
    t.name = schema.name;
    t.description = schema.description;
    t.schema = schema;
    t.body.kind = ToolBody::Kind::builtin;
    t.body.primitive = primitive.empty() ? schema.name : std::move(primitive);
    return t;
}

void to_json(json& j, const ToolDefinition& t) {
    json body;
    if (t.body.kind == ToolBody::Kind::builtin) {
        body = {{"kind", "builtin"}, {"primitive", t.body.primitive}};
    } else {
        body = {{"kind", "script"}, {"script", t.body.script}, {"runner", t.body.runner}};
    }
    j = json{{"name", t.name}, {"description", t.description}, {"schema", t.schema}, {"body", body}};
}

void from_json(const json& j, ToolDefinition& t) {
    t.name = j.at("name").get<std::string>();
    t.description = j.value("description", "");
    t.schema = j.at("schema").get<ToolSchema>();
    const auto& b = j.at("body");
    if (b.at("kind").get<std::string>() == "builtin") {
        t.body = ToolBody{ToolBody::Kind::builtin, b.at("primitive").get<std::string>(), {}, {}};
    } else {
        t.body = ToolBody{ToolBody::Kind::script, {}, b.at("script").get<std::string>(), b.value("runner", "")};
    }
}

std::string encode_item_name(const std::string& name) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (std::size_t i = 0; i < name.size(); ++i) {
        const auto c = static_cast<unsigned char>(name[i]);
        const bool safe = std::isalnum(c) || c == ' ' || c == '_' || c == '-' || (c == '.' && i > 0);
        if (safe) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::string decode_item_name(const std::string& stem) {
    std::string out;
    for (std::size_t i = 0; i < stem.size(); ++i) {
        if (stem[i] == '%' && i + 2 < stem.size()) {
            out.push_back(static_cast<char>(std::stoi(stem.substr(i + 1, 2), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(stem[i]);
        }
    }
    return out;
}

Registry::Registry(fs::path root, Clock clock) : root_(std::move(root)), clock_(std::move(clock)) {
    if (!clock_) clock_ = utc_now;
    for (auto k : {ItemKind::tool, ItemKind::agent, ItemKind::workflow}) {
        std::error_code ec;
        fs::create_directories(root_ / (std::string(kind_name(k)) + "s"), ec);
        if (ec) throw Error(ErrorCode::io, "cannot create registry at " + root_.string() + ": " + ec.message());
    }
}

fs::path Registry::item_path(ItemKind kind, const std::string& name) const {
    return root_ / (std::string(kind_name(kind)) + "s") / (encode_item_name(name) + ".def");
}

int Registry::put(ItemKind kind, const std::string& name, const json& definition) {
    if (name.empty()) throw Error(ErrorCode::invalid_def, "item name is empty");
    std::lock_guard lock(locks_[static_cast<std::size_t>(kind)]);
    const fs::path p = item_path(kind, name);
    int version = 1;
    std::string created = clock_();
    if (fs::exists(p)) {
        StoredItem prev = decode_item(read_file(p), p);
        version = prev.version + 1;
        created = prev.created_at;
    }
    json doc{{"kind", kind_name(kind)},
             {"name", name},
             {"version", version},
             {"created_at", created},
             {"definition", definition}};
    write_atomic(p, std::string(kHeader) + "\n" + doc.dump(2) + "\n");
    return version;
}

int Registry::put_tool(const ToolDefinition& tool) {
    tool.schema.check();
    if (tool.schema.name != tool.name) {
        throw Error(ErrorCode::invalid_def, "schema name " + tool.schema.name + " differs from tool name " + tool.name);
    }
    if (tool.body.kind == ToolBody::Kind::builtin && tool.body.primitive.empty()) {
        throw Error(ErrorCode::invalid_def, "builtin tool " + tool.name + " names no primitive");
    }
    return put(ItemKind::tool, tool.name, json(tool));
}

int Registry::put_agent(const AgentDefinition& agent) {
    agent.check();
    return put(ItemKind::agent, agent.name, json(agent));
}

int Registry::put_workflow(const std::string& form_xml) {
    WorkflowForm form;
    try {
        form = parse_workflow_form(form_xml);
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_def, e.what());
    }
    const auto diags = validate_workflow_form(form, this);
    if (!diags.empty()) {
        std::string msg;
        for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.code + " " + d.message;
        throw Error(ErrorCode::invalid_def, "workflow " + form.name + ": " + msg);
    }
    return put(ItemKind::workflow, form.name, json{{"form_xml", form_xml}});
}

StoredItem Registry::get_item(ItemKind kind, const std::string& name) const {
    const fs::path p = item_path(kind, name);
    if (!fs::exists(p)) throw Error(ErrorCode::not_found, "no " + std::string(kind_name(kind)) + " named " + name);
    return decode_item(read_file(p), p);
}

ToolDefinition Registry::get_tool(const std::string& name) const {
    return get_item(ItemKind::tool, name).definition.get<ToolDefinition>();
}

AgentDefinition Registry::get_agent(const std::string& name) const {
    return get_item(ItemKind::agent, name).definition.get<AgentDefinition>();
}

std::string Registry::get_workflow_xml(const std::string& name) const {
    return get_item(ItemKind::workflow, name).definition.at("form_xml").get<std::string>();
}

WorkflowForm Registry::get_workflow(const std::string& name) const {
    return parse_workflow_form(get_workflow_xml(name));
}

bool Registry::contains(ItemKind kind, const std::string& name) const {
    std::error_code ec;
    return fs::exists(item_path(kind, name), ec);
}

std::vector<std::string> Registry::list_items(ItemKind kind) const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(root_ / (std::string(kind_name(kind)) + "s"), ec)) {
        if (e.path().extension() == ".def") out.push_back(decode_item_name(e.path().stem().string()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void Registry::delete_item(ItemKind kind, const std::string& name) {
    std::lock_guard lock(locks_[static_cast<std::size_t>(kind)]);
    const fs::path p = item_path(kind, name);
    std::error_code ec;
    if (!fs::remove(p, ec)) throw Error(ErrorCode::not_found, "no " + std::string(kind_name(kind)) + " named " + name);
}

ToolResult Registry::run_tool(const std::string& name, const Arguments& args, const ToolRunner& runner) const {
    const ToolDefinition tool = get_tool(name);
    for (const auto& p : tool.schema.parameters) {
        if (p.required && !args.count(p.name)) {
            return ToolResult::failure("E_ARGS", "missing required argument '" + p.name + "' for " + name);
        }
    }
    if (tool.body.kind == ToolBody::Kind::builtin) return runner.call_primitive(tool.body.primitive, args);
    ScriptRunner* r = runner.runner(tool.body.runner);
    if (!r) {
        throw Error(ErrorCode::runner_refused,
                    "tool " + name + " has a script body and no runner '" + tool.body.runner + "' is configured");
    }
    return r->run(tool.body.script, args);
}

RegistrySnapshot Registry::snapshot() const {
    RegistrySnapshot snap;
    for (auto k : {ItemKind::tool, ItemKind::agent, ItemKind::workflow}) {
        std::lock_guard lock(locks_[static_cast<std::size_t>(k)]);
        const fs::path dir = root_ / (std::string(kind_name(k)) + "s");
        std::error_code ec;
        for (const auto& e : fs::directory_iterator(dir, ec)) {
            if (e.path().extension() != ".def") continue;
            snap[fs::relative(e.path(), root_).generic_string()] = read_file(e.path());
        }
    }
    return snap;
}

void Registry::restore(const RegistrySnapshot& snap) {
    for (auto k : {ItemKind::tool, ItemKind::agent, ItemKind::workflow}) {
        std::lock_guard lock(locks_[static_cast<std::size_t>(k)]);
        const fs::path dir = root_ / (std::string(kind_name(k)) + "s");
        std::error_code ec;
        std::vector<fs::path> doomed;
        for (const auto& e : fs::directory_iterator(dir, ec)) {
            if (e.path().extension() != ".def") continue;
            auto rel = fs::relative(e.path(), root_).generic_string();
            if (!snap.count(rel)) doomed.push_back(e.path());
        }
        for (const auto& p : doomed) fs::remove(p, ec);
    }
    for (const auto& [rel, bytes] : snap) {
        const fs::path p = root_ / rel;
        std::error_code ec;
        if (fs::exists(p, ec) && read_file(p) == bytes) continue;
        write_atomic(p, bytes);
    }
}

std::vector<std::string> seed_builtin_tools(Registry& registry, const ToolRunner& runner) {
    std::vector<std::string> added;
    for (const auto& name : runner.primitive_names()) {
        if (registry.has_tool(name)) continue;
        registry.put_tool(ToolDefinition::builtin(*runner.primitive_schema(name)));
        added.push_back(name);
    }
    return added;
}

std::optional<ToolSchema> RegistryToolHost::describe(const std::string& name) const {
    if (!registry_.has_tool(name)) return std::nullopt;
    return registry_.get_tool(name).schema;
}

ToolResult RegistryToolHost::invoke(const ToolCall& call) { return registry_.run_tool(call.tool_name, call.arguments, runner_); }

}  // namespace agentos

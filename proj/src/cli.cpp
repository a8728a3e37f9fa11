#include "agentos/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentos/backend.hpp"
#include "agentos/creation.hpp"
#include "agentos/engine.hpp"
#include "agentos/error.hpp"
#include "agentos/forms.hpp"
#include "agentos/management_tools.hpp"
#include "agentos/ragstore.hpp"
#include "agentos/registry.hpp"
#include "agentos/text.hpp"
#include "agentos/tool_runner.hpp"
#include "agentos/trace.hpp"
#include "agentos/viewport.hpp"
#include "agentos/workflow.hpp"
#include "agentos/xml.hpp"

namespace agentos {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Config {
    std::string config_file;
    std::string api_base;
    std::string api_key;
    std::string model;
    std::string mode = "direct";
    std::string registry = ".agentos/registry";
    std::string rag_root = ".agentos/rag";
    std::string workdir = ".";
    std::string cassette;
    std::string cassette_mode = "off";
    std::string script;
    std::vector<std::string> script_runners;
    bool json = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_trace(const std::string& path, const std::vector<TraceRecord>& records) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    for (const auto& r : records) out << format_trace_line(r) << "\n";
}

// Precedence: config file < environment < flags.
void resolve_config(Config& c, const CLI::App& app, const CliIO& io) {
    auto flag_given = [&](const char* name) { return app.get_option(name)->count() > 0; };
    if (!c.config_file.empty()) {
        auto j = json::parse(read_file(c.config_file), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::config, c.config_file + " is not a JSON object");
        auto take = [&](const char* key, const char* flag, std::string& field) {
            if (j.contains(key) && !flag_given(flag)) field = j.at(key).get<std::string>();
        };
        take("api_base", "--api-base", c.api_base);
        take("api_key", "--api-key", c.api_key);
        take("model", "--model", c.model);
        take("mode", "--mode", c.mode);
        take("registry", "--registry", c.registry);
        take("rag_root", "--rag-root", c.rag_root);
        take("cassette", "--cassette", c.cassette);
        take("cassette_mode", "--cassette-mode", c.cassette_mode);
    }
    auto env = [&](const char* var, const char* flag, std::string& field) {
        if (flag_given(flag)) return;
        if (auto v = io.getenv(var); v && !v->empty()) field = *v;
    };
    env("AGENT_API_BASE", "--api-base", c.api_base);
    env("AGENT_API_KEY", "--api-key", c.api_key);
    env("AGENT_MODEL", "--model", c.model);
    if (c.cassette_mode != "off" && c.cassette.empty()) {
        throw Error(ErrorCode::usage, "--cassette-mode " + c.cassette_mode + " needs --cassette");
    }
}

std::shared_ptr<Backend> make_backend(const Config& c) {
    std::shared_ptr<Backend> base;
    if (c.cassette_mode == "replay") return std::make_shared<CassetteBackend>(c.cassette, CassetteMode::replay);
    if (!c.script.empty()) {
        auto j = json::parse(read_file(c.script), nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::config, c.script + " is not valid JSON");
        base = scripted_backend_from_json(j);
    } else {
        HttpConfig h;
        h.base_url = c.api_base;
        h.api_key = c.api_key;
        base = std::make_shared<HttpBackend>(h);
    }
    if (c.cassette_mode == "record") return std::make_shared<CassetteBackend>(c.cassette, CassetteMode::record, base);
    return base;
}

std::shared_ptr<Engine> make_engine(const Config& c) {
    return std::make_shared<Engine>(make_backend(c), parse_mode(c.mode), c.model.empty() ? "default" : c.model);
}

struct Session {
    Config cfg;
    std::unique_ptr<ToolRunner> runner;
    std::unique_ptr<Registry> registry;
    std::unique_ptr<RagStore> rag;
    std::shared_ptr<HashingEmbedder> embedder;
    std::shared_ptr<Engine> engine;

    ToolRunner& tools() {
        if (!runner) {
            runner = std::make_unique<ToolRunner>(cfg.workdir);
            for (const auto& interp : cfg.script_runners) {
                runner->set_runner(interp, std::make_shared<ProcessRunner>(interp, fs::path(cfg.workdir)));
            }
            register_viewport_primitives(*runner, std::make_shared<ViewportSession>());
            register_rag_primitives(*runner, store(), hashing(), engine);
        }
        return *runner;
    }
    Registry& reg() {
        if (!registry) registry = std::make_unique<Registry>(cfg.registry);
        return *registry;
    }
    RagStore& store() {
        if (!rag) rag = std::make_unique<RagStore>(cfg.rag_root);
        return *rag;
    }
    std::shared_ptr<HashingEmbedder> hashing() {
        if (!embedder) embedder = std::make_shared<HashingEmbedder>();
        return embedder;
    }
    Engine& eng() {
        if (!engine) engine = make_engine(cfg);
        return *engine;
    }
};

std::string root_of(const std::string& xml) {
    try {
        return parse_xml(xml).name;
    } catch (const Error&) {
        return {};
    }
}

json diag_json(const Diagnostic& d) { return json{{"code", d.code}, {"path", d.path}, {"message", d.message}}; }

void print_outcome(std::ostream& out, const PipelineOutcome& o, bool as_json) {
    if (as_json) {
        json j{{"success", o.success},
               {"phase", phase_name(o.phase_reached)},
               {"artifacts", o.artifacts},
               {"attempts_with_diagnostics", o.diagnostics_history.size()}};
        if (o.error) j["error"] = code_name(*o.error);
        if (!o.message.empty()) j["message"] = o.message;
        if (!o.task_result.empty()) j["result"] = o.task_result;
        out << j.dump() << "\n";
        return;
    }
    out << "phase: " << phase_name(o.phase_reached) << "\n";
    out << "success: " << (o.success ? "yes" : "no") << "\n";
    if (o.error) out << "error: " << code_name(*o.error) << " " << o.message << "\n";
    out << "artifacts: " << (o.artifacts.empty() ? "(none)" : join(o.artifacts, ", ")) << "\n";
    for (std::size_t i = 0; i < o.diagnostics_history.size(); ++i) {
        std::string codes;
        for (const auto& d : o.diagnostics_history[i]) codes += (codes.empty() ? "" : " ") + d.code;
        out << "rejected form " << (i + 1) << ": " << codes << "\n";
    }
    if (!o.task_result.empty()) out << "result: " << o.task_result << "\n";
}

PipelineOutcome run_pipeline(Session& s, bool workflow, const std::string& requirements,
                             const std::optional<std::string>& task, int max_attempts, bool parallel) {
    PipelineConfig pc;
    pc.max_attempts = max_attempts;
    s.eng();
    pc.engine = s.engine;
    pc.workflow_run.parallelism = parallel ? Parallelism::concurrent : Parallelism::serial;
    seed_builtin_tools(s.reg(), s.tools());
    return workflow ? run_workflow_creation_pipeline(requirements, s.reg(), s.tools(), task, pc)
                    : run_agent_creation_pipeline(requirements, s.reg(), s.tools(), task, pc);
}

int repl(Session& s, CliIO& io, const std::string& log_path, int max_attempts) {
    bool workflow = false;
    std::string line;
    auto log = [&](const std::string& action, const std::string& key, const std::string& detail) {
        if (log_path.empty()) return;
        TraceLog t;
        t.add("repl", action, key, detail);
        t.append_to(log_path);
    };
    io.out << "agentos> " << std::flush;
    while (std::getline(io.in, line)) {
        const std::string cmd = trim(line);
        if (cmd == ":quit") break;
        if (cmd.empty()) {
        } else if (cmd.rfind(":mode", 0) == 0) {
            const std::string m = trim(std::string_view(cmd).substr(5));
            if (m == "agents" || m == "workflow") {
                workflow = m == "workflow";
                io.out << "mode " << m << "\n";
                log("MODE", m, {});
            } else {
                io.out << "usage: :mode agents|workflow\n";
            }
        } else if (cmd[0] == ':') {
            io.out << "unknown command " << cmd << " (try :mode or :quit)\n";
        } else {
            log("INPUT", workflow ? "workflow" : "agents", cmd);
            try {
                const auto o = run_pipeline(s, workflow, cmd, std::nullopt, max_attempts, false);
                print_outcome(io.out, o, s.cfg.json);
                log("OUTCOME", o.success ? "success" : "failure",
                    std::string(phase_name(o.phase_reached)) + (o.artifacts.empty() ? "" : ": " + join(o.artifacts, ", ")));
            } catch (const Error& e) {
                io.out << "error: " << e.what() << "\n";
                log("ERROR", std::string(e.code_str()), e.what());
                if (e.code() == ErrorCode::config) s.engine.reset();
            }
        }
        io.out << "agentos> " << std::flush;
    }
    io.out << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliIO io) {
    if (!io.getenv) {
        io.getenv = [](const std::string& k) -> std::optional<std::string> {
            const char* v = std::getenv(k.c_str());
            if (!v) return std::nullopt;
            return std::string(v);
        };
    }
    Session s;
    Config& c = s.cfg;

    CLI::App app{"Multi-agent runtime: forms, workflows, creation pipelines, registry and document store."};
    app.name("agentos");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", c.config_file, "JSON config file");
    app.add_option("--api-base", c.api_base, "OpenAI-compatible base URL (env AGENT_API_BASE)");
    app.add_option("--api-key", c.api_key, "API key (env AGENT_API_KEY)");
    app.add_option("--model", c.model, "Default model id (env AGENT_MODEL)");
    app.add_option("--mode", c.mode, "Tool-use mode")->check(CLI::IsMember({"direct", "transformed"}));
    app.add_option("--registry", c.registry, "Registry root directory");
    app.add_option("--rag-root", c.rag_root, "Collection root directory");
    app.add_option("--workdir", c.workdir, "Working directory for file tools");
    app.add_option("--cassette", c.cassette, "Cassette file");
    app.add_option("--cassette-mode", c.cassette_mode, "Cassette mode")->check(CLI::IsMember({"off", "record", "replay"}));
    app.add_option("--script", c.script, "Scripted backend JSON (offline runs)");
    app.add_option("--allow-scripts", c.script_runners, "Interpreter allowed to run script tools (repeatable)");
    app.add_flag("--json", c.json, "Machine-readable output");

    // validate
    std::string form_path;
    bool with_registry = false;
    auto* validate = app.add_subcommand("validate", "Check an agent or workflow form");
    validate->add_option("form", form_path, "Form XML file")->required();
    validate->add_flag("--with-registry", with_registry, "Also check names against the registry");

    // run-workflow
    std::string input, trace_path;
    bool parallel = false;
    auto* runwf = app.add_subcommand("run-workflow", "Run a workflow form");
    runwf->add_option("form", form_path, "Workflow form XML file")->required();
    runwf->add_option("--input", input, "System input value")->required();
    runwf->add_flag("--parallel", parallel, "Run ready events concurrently");
    runwf->add_option("--trace", trace_path, "Write the run trace here");

    // creation
    std::string requirements, task;
    int max_attempts = 3;
    auto* cagents = app.add_subcommand("create-agents", "Create tools and agents from a requirement");
    auto* cwf = app.add_subcommand("create-workflow", "Create a workflow from a requirement");
    for (auto* sc : {cagents, cwf}) {
        sc->add_option("--requirements", requirements, "What to build")->required();
        sc->add_option("--task", task, "Task to run once created");
        sc->add_option("--max-attempts", max_attempts, "Attempts per phase")->check(CLI::PositiveNumber);
        sc->add_option("--trace", trace_path, "Write the pipeline trace here");
    }
    cwf->add_flag("--parallel", parallel, "Run the workflow task concurrently");

    // registry
    std::string kind, name;
    auto* reg = app.add_subcommand("registry", "Inspect or edit the registry");
    reg->require_subcommand(1);
    auto* rlist = reg->add_subcommand("list", "List item names");
    rlist->add_option("kind", kind, "tools|agents|workflows")->required();
    auto* rshow = reg->add_subcommand("show", "Print an item definition");
    rshow->add_option("kind", kind)->required();
    rshow->add_option("name", name)->required();
    auto* rdel = reg->add_subcommand("delete", "Remove an item");
    rdel->add_option("kind", kind)->required();
    rdel->add_option("name", name)->required();
    auto* rseed = reg->add_subcommand("seed", "Register the builtin primitives as tools");

    // rag
    std::string rag_path, collection, query;
    std::size_t chunk_size = kDefaultChunkSize, k = kDefaultTopK;
    int max_rewrites = 2;
    auto* rag = app.add_subcommand("rag", "Document collections");
    rag->require_subcommand(1);
    auto* radd = rag->add_subcommand("add", "Ingest .txt/.md files, a directory or a zip");
    radd->add_option("path", rag_path)->required();
    radd->add_option("--collection", collection)->required();
    radd->add_option("--chunk-size", chunk_size)->check(CLI::PositiveNumber);
    auto* rquery = rag->add_subcommand("query", "Top-k passages for a query");
    rquery->add_option("text", query)->required();
    rquery->add_option("--collection", collection)->required();
    rquery->add_option("-k", k)->check(CLI::PositiveNumber);
    auto* ranswer = rag->add_subcommand("answer", "Answer a question from a collection");
    ranswer->add_option("text", query)->required();
    ranswer->add_option("--collection", collection)->required();
    ranswer->add_option("-k", k)->check(CLI::PositiveNumber);
    ranswer->add_option("--max-rewrites", max_rewrites)->check(CLI::NonNegativeNumber);

    // repl
    std::string session_log;
    auto* repl_cmd = app.add_subcommand("repl", "Interactive creation session");
    repl_cmd->add_option("--session-log", session_log, "Append the session trace here");
    repl_cmd->add_option("--max-attempts", max_attempts)->check(CLI::PositiveNumber);

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, io.out, io.err);
        return rc == 0 ? 0 : 2;
    }

    auto& out = io.out;
    try {
        resolve_config(c, app, io);

        if (*validate) {
            const std::string xml = read_file(form_path);
            const std::string root = root_of(xml);
            std::vector<Diagnostic> diags, warnings;
            const RegistryView* view = with_registry ? &s.reg() : nullptr;
            try {
                if (root == "agents") {
                    diags = validate_agent_form(parse_agent_form(xml), view);
                } else {
                    const WorkflowForm f = parse_workflow_form(xml);
                    diags = validate_workflow_form(f, view);
                    warnings = lint_workflow_form(f);
                }
            } catch (const FormError& e) {
                diags.push_back({std::string(e.code_str()), e.reason(), e.path()});
            }
            if (c.json) {
                json j{{"diagnostics", json::array()}, {"warnings", json::array()}};
                for (const auto& d : diags) j["diagnostics"].push_back(diag_json(d));
                for (const auto& d : warnings) j["warnings"].push_back(diag_json(d));
                out << j.dump() << "\n";
            } else {
                for (const auto& d : diags) out << d.code << " " << d.path << ": " << d.message << "\n";
                for (const auto& d : warnings) out << "warning " << d.code << " " << d.path << ": " << d.message << "\n";
                out << diags.size() << " diagnostics\n";
            }
            return diags.empty() ? 0 : 1;
        }

        if (*runwf) {
            const WorkflowForm form = parse_workflow_form(read_file(form_path));
            WorkflowRunOptions opts;
            opts.parallelism = parallel ? Parallelism::concurrent : Parallelism::serial;
            Engine& engine = s.eng();
            const auto r = run_registered_workflow(s.reg(), s.tools(), engine, form, input, opts);
            write_trace(trace_path, r.trace);
            if (c.json) {
                json j{{"completed", r.completed()}, {"events_executed", r.executions.size()}};
                if (r.completed()) j["value"] = r.terminal.value;
                else j["reason"] = r.terminal.reason;
                if (r.terminal.code) j["error"] = code_name(*r.terminal.code);
                out << j.dump() << "\n";
            } else if (r.completed()) {
                out << "COMPLETED " << (form.system_output.empty() ? "" : form.system_output[0].key) << ": "
                    << r.terminal.value << "\n";
            } else {
                out << "ABORTED " << (r.terminal.code ? std::string(code_name(*r.terminal.code)) + " " : "")
                    << r.terminal.reason << "\n";
            }
            return r.completed() ? 0 : 1;
        }

        if (*cagents || *cwf) {
            std::optional<std::string> t;
            if (!task.empty()) t = task;
            const auto o = run_pipeline(s, cwf->parsed(), requirements, t, max_attempts, parallel);
            write_trace(trace_path, o.trace);
            print_outcome(out, o, c.json);
            return o.success ? 0 : 1;
        }

        if (*reg) {
            if (*rseed) {
                const auto added = seed_builtin_tools(s.reg(), s.tools());
                for (const auto& n : added) out << "added " << n << "\n";
                out << added.size() << " tools added\n";
                return 0;
            }
            const ItemKind kd = parse_kind(kind);
            if (*rlist) {
                const auto names = s.reg().list_items(kd);
                if (c.json) out << json(names).dump() << "\n";
                else for (const auto& n : names) out << n << "\n";
                return 0;
            }
            if (*rshow) {
                const StoredItem item = s.reg().get_item(kd, name);
                if (c.json) {
                    out << json{{"kind", kind_name(kd)}, {"name", item.name}, {"version", item.version},
                                {"definition", item.definition}}.dump() << "\n";
                } else if (kd == ItemKind::workflow) {
                    out << "# " << item.name << " (version " << item.version << ")\n" << s.reg().get_workflow_xml(name);
                    if (!s.reg().get_workflow_xml(name).ends_with("\n")) out << "\n";
                } else {
                    out << "# " << item.name << " (version " << item.version << ")\n" << item.definition.dump(2) << "\n";
                }
                return 0;
            }
            if (*rdel) {
                s.reg().delete_item(kd, name);
                out << "deleted " << kind_name(kd) << " " << name << "\n";
                return 0;
            }
        }

        if (*rag) {
            if (*radd) {
                const auto rep = s.store().ingest(rag_path, collection, *s.hashing(), chunk_size);
                if (c.json) {
                    out << json{{"files_seen", rep.files_seen}, {"files_ingested", rep.files_ingested},
                                {"files_skipped", rep.files_skipped}, {"chunks_written", rep.chunks_written}}.dump()
                        << "\n";
                } else {
                    out << "files_seen " << rep.files_seen << "\nfiles_ingested " << rep.files_ingested
                        << "\nfiles_skipped " << rep.files_skipped << "\nchunks_written " << rep.chunks_written << "\n";
                    for (const auto& sk : rep.skipped) out << "skipped " << sk << "\n";
                }
                return 0;
            }
            if (*rquery) {
                const auto hits = s.store().query(query, collection, *s.hashing(), k);
                if (c.json) {
                    json j = json::array();
                    for (const auto& h : hits) {
                        j.push_back({{"doc_id", h.chunk.doc_id}, {"ordinal", h.chunk.ordinal}, {"score", h.score},
                                     {"text", h.chunk.text}});
                    }
                    out << j.dump() << "\n";
                } else {
                    out << format_chunks(hits);
                }
                return 0;
            }
            if (*ranswer) {
                RagLimits lim;
                lim.k = k;
                lim.max_rewrites = max_rewrites;
                const auto a = rag_answer_loop(query, collection, s.store(), *s.hashing(), s.eng(), lim);
                if (c.json) {
                    out << json{{"answered", a.answered}, {"text", a.text}, {"retrievals", a.retrievals},
                                {"queries", a.queries}}.dump() << "\n";
                } else {
                    out << (a.answered ? "ANSWER " : "INSUFFICIENT ") << a.text << "\n";
                }
                return a.answered ? 0 : 1;
            }
        }

        if (*repl_cmd) return repl(s, io, session_log, max_attempts);
    } catch (const Error& e) {
        io.err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::usage ? 2 : 1;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, CliIO{std::cin, std::cout, std::cerr, {}});
}

}  // namespace agentos

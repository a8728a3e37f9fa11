#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentos/forms.hpp"
#include "agentos/kernel.hpp"
#include "agentos/tool_runner.hpp"
#include "agentos/types.hpp"

namespace agentos {

enum class ItemKind { tool, agent, workflow };

std::string_view kind_name(ItemKind k);
ItemKind parse_kind(std::string_view s);

struct ToolBody {
    enum class Kind { builtin, script };
    Kind kind = Kind::builtin;
    std::string primitive;  // builtin
    std::string script;     // script
    std::string runner;     // script
    bool operator==(const ToolBody&) const = default;
};

struct ToolDefinition {
    std::string name;
    std::string description;
    ToolSchema schema;
    ToolBody body;
    bool operator==(const ToolDefinition&) const = default;

    static ToolDefinition builtin(const ToolSchema& schema, std::string primitive = {});
};

void to_json(nlohmann::json& j, const ToolDefinition& t);
void from_json(const nlohmann::json& j, ToolDefinition& t);

struct StoredItem {
    ItemKind kind = ItemKind::tool;
    std::string name;
    int version = 0;
    std::string created_at;
    nlohmann::json definition;
};

// Raw file bytes keyed by path relative to the registry root.
using RegistrySnapshot = std::map<std::string, std::string>;

// One file per item at <root>/<kind>s/<name>.def:
//   line 1: "agentos-def 1"
//   rest:   JSON {"kind", "name", "version", "created_at", "definition"}
class Registry : public RegistryView {
public:
    using Clock = std::function<std::string()>;

    explicit Registry(std::filesystem::path root, Clock clock = {});

    int put_tool(const ToolDefinition& tool);
    int put_agent(const AgentDefinition& agent);
    // Validates against this registry; a failing form raises E_INVALID_DEF.
    int put_workflow(const std::string& form_xml);

    ToolDefinition get_tool(const std::string& name) const;
    AgentDefinition get_agent(const std::string& name) const;
    std::string get_workflow_xml(const std::string& name) const;
    WorkflowForm get_workflow(const std::string& name) const;

    StoredItem get_item(ItemKind kind, const std::string& name) const;
    std::vector<std::string> list_items(ItemKind kind) const;
    void delete_item(ItemKind kind, const std::string& name);
    bool contains(ItemKind kind, const std::string& name) const;

    bool has_tool(const std::string& name) const override { return contains(ItemKind::tool, name); }
    bool has_agent(const std::string& name) const override { return contains(ItemKind::agent, name); }
    bool has_workflow(const std::string& name) const override { return contains(ItemKind::workflow, name); }

    // Missing tools, missing required arguments (E_ARGS result) and refused
    // scripts (E_RUNNER_REFUSED, thrown) are handled here.
    ToolResult run_tool(const std::string& name, const Arguments& args, const ToolRunner& runner) const;

    RegistrySnapshot snapshot() const;
    void restore(const RegistrySnapshot& snap);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path item_path(ItemKind kind, const std::string& name) const;

private:
    int put(ItemKind kind, const std::string& name, const nlohmann::json& definition);

    std::filesystem::path root_;
    Clock clock_;
    mutable std::array<std::mutex, 3> locks_;
};

// Registers a builtin tool entry for every runner primitive that is not in the
// registry yet. Returns the names added.
std::vector<std::string> seed_builtin_tools(Registry& registry, const ToolRunner& runner);

// Exposes registry tools to agents.
class RegistryToolHost : public ToolHost {
public:
    RegistryToolHost(const Registry& registry, const ToolRunner& runner) : registry_(registry), runner_(runner) {}
    std::optional<ToolSchema> describe(const std::string& name) const override;
    ToolResult invoke(const ToolCall& call) override;

private:
    const Registry& registry_;
    const ToolRunner& runner_;
};

// Filename encoding for item names: bytes outside [A-Za-z0-9 _.-] and a leading
// '.' become %XX.
std::string encode_item_name(const std::string& name);
std::string decode_item_name(const std::string& file_stem);

}  // namespace agentos

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentos/types.hpp"

namespace agentos {

using Primitive = std::function<ToolResult(const Arguments&)>;

struct PrimitiveTool {
    ToolSchema schema;
    Primitive fn;
};

// Executes script-bodied tools. Nothing implements this by default, so scripts are
// refused unless a runner is configured explicitly.
class ScriptRunner {
public:
    virtual ~ScriptRunner() = default;
    virtual ToolResult run(const std::string& script, const Arguments& args) = 0;
};

// Runs `interpreter <script file>` in a working directory with the arguments as a
// JSON object on stdin; stdout becomes the payload, a nonzero exit an error.
class ProcessRunner : public ScriptRunner {
public:
    ProcessRunner(std::string interpreter, std::filesystem::path workdir,
                  std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ToolResult run(const std::string& script, const Arguments& args) override;

private:
    std::string interpreter_;
    std::filesystem::path workdir_;
    std::chrono::milliseconds timeout_;
};

// Evaluates + - * / % and parentheses over decimal numbers. Integral results print
// without a fractional part. Throws E_ARGS on malformed input or division by zero.
std::string arithmetic_eval(std::string_view expr);

class ToolRunner {
public:
    // Registers echo, read_text_file, write_text_file, list_directory and
    // arithmetic_eval; file primitives are confined to `workdir`.
    explicit ToolRunner(std::filesystem::path workdir = std::filesystem::current_path());

    void add_primitive(PrimitiveTool tool);
    bool has_primitive(const std::string& id) const;
    std::optional<ToolSchema> primitive_schema(const std::string& id) const;
    std::vector<std::string> primitive_names() const;
    ToolResult call_primitive(const std::string& id, const Arguments& args) const;

    void set_runner(const std::string& id, std::shared_ptr<ScriptRunner> runner);
    ScriptRunner* runner(const std::string& id) const;

    const std::filesystem::path& workdir() const noexcept { return workdir_; }
    // Resolves `rel` inside the working directory; throws E_IO when it escapes.
    std::filesystem::path confine(const std::string& rel) const;

private:
    std::filesystem::path workdir_;
    mutable std::mutex mutex_;
    std::map<std::string, PrimitiveTool> primitives_;
    std::map<std::string, std::shared_ptr<ScriptRunner>> runners_;
};

}  // namespace agentos

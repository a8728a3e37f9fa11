#include "agentos/tool_runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentos/error.hpp"

namespace agentos {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- arithmetic

namespace {

class Calc {
public:
    explicit Calc(std::string_view s) : s_(s) {}

    double run() {
        double v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) {
        throw Error(ErrorCode::args, why + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    double expr() {
        double v = term();
        while (true) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }
    double term() {
        double v = unary();
        while (true) {
            if (eat('*')) {
                v *= unary();
            } else if (eat('/')) {
                double d = unary();
                if (d == 0) fail("division by zero");
                v /= d;
            } else if (eat('%')) {
                double d = unary();
                if (d == 0) fail("division by zero");
                v = std::fmod(v, d);
            } else {
                return v;
            }
        }
    }
    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return atom();
    }
    double atom() {
        if (eat('(')) {
            double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (start == pos_) fail(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'" : "unexpected end");
        try {
            std::size_t used = 0;
            std::string num(s_.substr(start, pos_ - start));
            double v = std::stod(num, &used);
            if (used != num.size()) fail("bad number '" + num + "'");
            return v;
        } catch (const std::invalid_argument&) {
            fail("bad number");
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string arithmetic_eval(std::string_view expr) {
    const double v = Calc(expr).run();
    if (!std::isfinite(v)) throw Error(ErrorCode::args, "result is not finite");
    char buf[64];
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    } else {
        std::snprintf(buf, sizeof buf, "%.15g", v);
    }
    return buf;
}

// ---------------------------------------------------------------- runner

ToolRunner::ToolRunner(fs::path workdir) : workdir_(fs::absolute(std::move(workdir))) {
    add_primitive({ToolSchema{"echo", "Return the given text unchanged.", {{"text", "Text to return", true}}},
                   [](const Arguments& a) { return ToolResult::success(a.at("text")); }});

    add_primitive({ToolSchema{"read_text_file",
                              "Read a text file inside the working directory.",
                              {{"path", "File path relative to the working directory", true}}},
                   [this](const Arguments& a) {
                       std::ifstream in(confine(a.at("path")), std::ios::binary);
                       if (!in) return ToolResult::failure("E_IO", "cannot read " + a.at("path"));
                       std::ostringstream ss;
                       ss << in.rdbuf();
                       return ToolResult::success(ss.str());
                   }});

    add_primitive({ToolSchema{"write_text_file",
                              "Write text to a file inside the working directory, replacing it.",
                              {{"path", "File path relative to the working directory", true},
                               {"content", "Text to write", true}}},
                   [this](const Arguments& a) {
                       const fs::path p = confine(a.at("path"));
                       std::error_code ec;
                       if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
                       std::ofstream out(p, std::ios::binary | std::ios::trunc);
                       if (!out) return ToolResult::failure("E_IO", "cannot write " + a.at("path"));
                       out << a.at("content");
                       return ToolResult::success("wrote " + std::to_string(a.at("content").size()) + " bytes to " +
                                                  a.at("path"));
                   }});

    add_primitive({ToolSchema{"list_directory",
                              "List entries of a directory inside the working directory.",
                              {{"path", "Directory relative to the working directory (default .)", false}}},
                   [this](const Arguments& a) {
                       auto it = a.find("path");
                       const fs::path p = confine(it == a.end() || it->second.empty() ? "." : it->second);
                       std::error_code ec;
                       if (!fs::is_directory(p, ec)) return ToolResult::failure("E_IO", "not a directory");
                       std::vector<std::string> names;
                       for (const auto& e : fs::directory_iterator(p, ec)) {
                           names.push_back(e.path().filename().string() + (e.is_directory() ? "/" : ""));
                       }
                       std::sort(names.begin(), names.end());
                       std::string out;
                       for (const auto& n : names) out += n + "\n";
                       return ToolResult::success(out);
                   }});

    add_primitive({ToolSchema{"arithmetic_eval",
                              "Evaluate an arithmetic expression with + - * / % and parentheses.",
                              {{"expr", "The expression, e.g. (2+3)*4", true}}},
                   [](const Arguments& a) {
                       try {
                           return ToolResult::success(arithmetic_eval(a.at("expr")));
                       } catch (const Error& e) {
                           return ToolResult::failure(std::string(e.code_str()), e.what());
                       }
                   }});
}

fs::path ToolRunner::confine(const std::string& rel) const {
    const fs::path base = fs::weakly_canonical(workdir_);
    const fs::path p = fs::weakly_canonical(fs::path(rel).is_absolute() ? fs::path(rel) : base / rel);
    auto [b, _] = std::mismatch(base.begin(), base.end(), p.begin(), p.end());
    if (b != base.end()) throw Error(ErrorCode::io, "path " + rel + " leaves the working directory");
    return p;
}

void ToolRunner::add_primitive(PrimitiveTool tool) {
    tool.schema.check();
    std::lock_guard lock(mutex_);
    primitives_[tool.schema.name] = std::move(tool);
}

bool ToolRunner::has_primitive(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return primitives_.count(id) > 0;
}

std::optional<ToolSchema> ToolRunner::primitive_schema(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = primitives_.find(id);
    if (it == primitives_.end()) return std::nullopt;
    return it->second.schema;
}

std::vector<std::string> ToolRunner::primitive_names() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [k, _] : primitives_) out.push_back(k);
    return out;
}

ToolResult ToolRunner::call_primitive(const std::string& id, const Arguments& args) const {
    Primitive fn;
    {
        std::lock_guard lock(mutex_);
        auto it = primitives_.find(id);
        if (it == primitives_.end()) throw Error(ErrorCode::not_found, "no primitive named " + id);
        for (const auto& p : it->second.schema.parameters) {
            if (p.required && !args.count(p.name)) {
                return ToolResult::failure("E_ARGS", "missing required argument '" + p.name + "'");
            }
        }
        fn = it->second.fn;
    }
    try {
        return fn(args);
    } catch (const Error& e) {
        return ToolResult::failure(std::string(e.code_str()), e.what());
    }
}

void ToolRunner::set_runner(const std::string& id, std::shared_ptr<ScriptRunner> runner) {
    std::lock_guard lock(mutex_);
    runners_[id] = std::move(runner);
}

ScriptRunner* ToolRunner::runner(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = runners_.find(id);
    return it == runners_.end() ? nullptr : it->second.get();
}

// ---------------------------------------------------------------- process runner

ProcessRunner::ProcessRunner(std::string interpreter, fs::path workdir, std::chrono::milliseconds timeout)
    : interpreter_(std::move(interpreter)), workdir_(fs::absolute(std::move(workdir))), timeout_(timeout) {}

ToolResult ProcessRunner::run(const std::string& script, const Arguments& args) {
    fs::create_directories(workdir_);
    char tmpl[] = "tool-XXXXXX";
    const std::string pattern = (workdir_ / tmpl).string();
    std::vector<char> path(pattern.begin(), pattern.end());
    path.push_back('\0');
    const int fd = ::mkstemp(path.data());
    if (fd < 0) return ToolResult::failure("E_IO", "cannot create script file");
    const std::string script_path(path.data());
    if (::write(fd, script.data(), script.size()) != static_cast<ssize_t>(script.size())) {
        ::close(fd);
        ::unlink(script_path.c_str());
        return ToolResult::failure("E_IO", "cannot write script file");
    }
    ::close(fd);

    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
        ::unlink(script_path.c_str());
        return ToolResult::failure("E_IO", "pipe failed");
    }
    const pid_t pid = ::fork();
    if (pid == 0) {
        ::dup2(in_pipe[0], 0);
        ::dup2(out_pipe[1], 1);
        ::dup2(out_pipe[1], 2);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        if (::chdir(workdir_.c_str()) != 0) ::_exit(126);
        ::execlp(interpreter_.c_str(), interpreter_.c_str(), script_path.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (pid < 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::unlink(script_path.c_str());
        return ToolResult::failure("E_IO", "fork failed");
    }

    const std::string payload = nlohmann::json(args).dump();
    ::signal(SIGPIPE, SIG_IGN);
    [[maybe_unused]] auto w = ::write(in_pipe[1], payload.data(), payload.size());
    ::close(in_pipe[1]);

    std::string output;
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    bool timed_out = false;
    char buf[4096];
    while (true) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd p{out_pipe[0], POLLIN, 0};
        if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) continue;
        const ssize_t n = ::read(out_pipe[0], buf, sizeof buf);
        if (n <= 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }
    ::close(out_pipe[0]);
    if (timed_out) ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    ::unlink(script_path.c_str());

    if (timed_out) return ToolResult::failure("E_TIMEOUT", output);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return ToolResult::failure("E_SCRIPT_FAILED",
                                   "exit status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) +
                                       "\n" + output);
    }
    return ToolResult::success(output);
}

}  // namespace agentos

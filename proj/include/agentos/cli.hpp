#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace agentos {

struct CliIO {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
    // Environment lookup; defaults to the process environment.
    std::function<std::optional<std::string>(const std::string&)> getenv;
};

// Exit codes: 0 success, 1 operation failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, CliIO io);
int run_cli(int argc, char** argv);

}  // namespace agentos

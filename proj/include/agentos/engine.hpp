#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "agentos/backend.hpp"
#include "agentos/types.hpp"

namespace agentos {

struct CallAction {
    ToolCall call;
    std::string raw;             // response text as received
    bool trailing_text = false;  // transformed mode: prose after the first call
};

struct FinalText {
    std::string text;
};

// Transformed-mode response that opened a call but broke the grammar.
struct MalformedCall {
    std::string raw;
    std::size_t offset = 0;
    std::string reason;
};

using NextAction = std::variant<CallAction, FinalText, MalformedCall>;

class Engine {
public:
    Engine(std::shared_ptr<Backend> backend, EngineMode mode, std::string default_model = "default");

    // `messages` must start with the system message when there is one. In
    // transformed mode the rendered tool listing is appended to it (or inserted
    // as a new system message) and no schemas go over the wire.
    NextAction next_action(std::vector<Message> messages, const std::vector<ToolSchema>& tools,
                           const std::string& model = {}, const std::string& tag = {});

    // Plain completion without tools.
    std::string complete_text(const std::string& system, const std::string& user, const std::string& model = {},
                              const std::string& tag = {});

    EngineMode mode() const noexcept { return mode_; }
    const std::string& default_model() const noexcept { return default_model_; }
    Backend& backend() { return *backend_; }

private:
    std::shared_ptr<Backend> backend_;
    EngineMode mode_;
    std::string default_model_;
};

}  // namespace agentos

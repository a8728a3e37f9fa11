#include "agentos/engine.hpp"

#include "agentos/call_grammar.hpp"
#include "agentos/error.hpp"
#include "agentos/text.hpp"

namespace agentos {

Engine::Engine(std::shared_ptr<Backend> backend, EngineMode mode, std::string default_model)
    : backend_(std::move(backend)), mode_(mode), default_model_(std::move(default_model)) {
    if (!backend_) throw Error(ErrorCode::config, "engine needs a backend");
}

NextAction Engine::next_action(std::vector<Message> messages, const std::vector<ToolSchema>& tools,
                               const std::string& model, const std::string& tag) {
    CompletionRequest req;
    req.model = model.empty() ? default_model_ : model;
    req.mode = mode_;
    req.tag = tag;

    if (mode_ == EngineMode::direct) {
        req.messages = std::move(messages);
        req.tools = tools;
        CompletionResponse resp = backend_->complete(req);
        if (resp.tool_call) {
            if (!is_identifier(resp.tool_call->tool_name)) {
                return MalformedCall{resp.content, 0, "malformed name '" + resp.tool_call->tool_name + "'"};
            }
            return CallAction{std::move(*resp.tool_call), std::move(resp.content), false};
        }
        return FinalText{std::move(resp.content)};
    }

    if (!tools.empty()) {
        const std::string listing = render_transformed_schema(tools);
        if (!messages.empty() && messages.front().role == "system") {
            auto& sys = messages.front().content;
            if (!sys.empty()) sys += "\n\n";
            sys += listing;
        } else {
            messages.insert(messages.begin(), Message{"system", listing, std::nullopt, {}});
        }
    }
    req.messages = std::move(messages);
    CompletionResponse resp = backend_->complete(req);
    if (!contains_call_opener(resp.content)) return FinalText{std::move(resp.content)};
    try {
        ParsedCall parsed = parse_transformed_call(resp.content);
        return CallAction{std::move(parsed.call), std::move(resp.content), parsed.trailing_text};
    } catch (const ParseError& e) {
        return MalformedCall{std::move(resp.content), e.offset(), e.reason()};
    }
}

std::string Engine::complete_text(const std::string& system, const std::string& user, const std::string& model,
                                  const std::string& tag) {
    CompletionRequest req;
    req.model = model.empty() ? default_model_ : model;
    req.mode = mode_;
    req.tag = tag;
    if (!system.empty()) req.messages.push_back(Message{"system", system, std::nullopt, {}});
    req.messages.push_back(Message{"user", user, std::nullopt, {}});
    return backend_->complete(req).content;
}

}  // namespace agentos

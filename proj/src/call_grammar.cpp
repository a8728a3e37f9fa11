#include "agentos/call_grammar.hpp"

#include <cctype>

#include "agentos/error.hpp"
#include "agentos/text.hpp"

namespace agentos {

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_name_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
}

// Reads NAME">" starting at `pos`; returns the name and leaves `pos` after '>'.
std::string read_tag_name(std::string_view text, std::size_t& pos, std::size_t tag_start,
                          const char* unclosed_reason) {
    std::size_t j = pos;
    while (j < text.size() && is_name_char(text[j])) ++j;
    if (j == text.size()) throw ParseError(tag_start, unclosed_reason);
    if (text[j] != '>') throw ParseError(j, "malformed name");
    std::string name(text.substr(pos, j - pos));
    if (!is_identifier(name)) throw ParseError(pos, "malformed name");
    pos = j + 1;
    return name;
}

}  // namespace

bool contains_call_opener(std::string_view text) {
    return text.find(kFunctionOpen) != std::string_view::npos;
}

ParsedCall parse_transformed_call(std::string_view text) {
    const std::size_t opener = text.find(kFunctionOpen);
    if (opener == std::string_view::npos) throw ParseError(0, "no function call");

    ParsedCall out;
    out.begin = opener;
    std::size_t pos = opener + kFunctionOpen.size();
    out.call.tool_name = read_tag_name(text, pos, opener, "unclosed function tag");

    while (true) {
        while (pos < text.size() && is_ws(text[pos])) ++pos;
        if (pos == text.size()) throw ParseError(opener, "unclosed function tag");

        if (starts_with_at(text, pos, kFunctionClose)) {
            pos += kFunctionClose.size();
            break;
        }
        if (starts_with_at(text, pos, kFunctionOpen)) {
            throw ParseError(pos, "nested function tag");
        }
        if (!starts_with_at(text, pos, kParameterOpen)) {
            throw ParseError(pos, "unexpected content in function call");
        }

        const std::size_t param_start = pos;
        pos += kParameterOpen.size();
        const std::size_t name_at = pos;
        std::string name = read_tag_name(text, pos, param_start, "unclosed parameter tag");
        const std::size_t close = text.find(kParameterClose, pos);
        if (close == std::string_view::npos) throw ParseError(param_start, "unclosed parameter tag");
        if (out.call.arguments.count(name)) throw ParseError(name_at, "duplicate parameter name");
        out.call.arguments.emplace(std::move(name), std::string(text.substr(pos, close - pos)));
        pos = close + kParameterClose.size();
    }

    out.end = pos;
    for (std::size_t i = pos; i < text.size(); ++i) {
        if (!is_ws(text[i])) {
            out.trailing_text = true;
            break;
        }
    }
    return out;
}

std::string render_call(const ToolCall& call) {
    std::string out;
    out.append(kFunctionOpen).append(call.tool_name).push_back('>');
    for (const auto& [key, value] : call.arguments) {
        out.append(kParameterOpen).append(key).push_back('>');
        out.append(value).append(kParameterClose);
    }
    out.append(kFunctionClose);
    return out;
}

std::string render_transformed_schema(const std::vector<ToolSchema>& tools) {
    if (tools.empty()) throw Error(ErrorCode::empty, "no tools to render");

    std::string out =
        "You can call tools. To call one, reply with exactly one call written as:\n"
        "<function=TOOL_NAME><parameter=PARAM_NAME>value</parameter></function>\n"
        "Parameter values are written verbatim. Reply with plain text (no call) when you are done.\n"
        "\nAvailable tools:\n";
    for (const auto& tool : tools) {
        out += "\n## " + tool.name + "\n";
        if (!tool.description.empty()) out += tool.description + "\n";
        if (!tool.parameters.empty()) {
            out += "Parameters:\n";
            for (const auto& p : tool.parameters) {
                out += "- " + p.name + (p.required ? " (required)" : " (optional)");
                if (!p.description.empty()) out += ": " + p.description;
                out += "\n";
            }
        }
        out += "Call template:\n";
        out.append(kFunctionOpen).append(tool.name).push_back('>');
        for (const auto& p : tool.parameters) {
            out.append(kParameterOpen).append(p.name).append(">value").append(kParameterClose);
        }
        out.append(kFunctionClose).push_back('\n');
    }
    return out;
}

}  // namespace agentos

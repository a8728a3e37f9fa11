#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "agentos/types.hpp"

namespace agentos {

// XML-style tool invocation used when a backend has no native tool channel:
//
//   call  := "<function=" name ">" ws* (param ws*)* "</function>"
//   param := "<parameter=" name ">" raw-value "</parameter>"
//
// Names follow the identifier grammar. Raw values are taken verbatim and may not
// contain "</parameter>" (there is no escape mechanism).
struct ParsedCall {
    ToolCall call;
    std::size_t begin = 0;       // offset of "<function="
    std::size_t end = 0;         // one past "</function>"
    bool trailing_text = false;  // non-whitespace after the first complete call
};

inline constexpr std::string_view kFunctionOpen = "<function=";
inline constexpr std::string_view kFunctionClose = "</function>";
inline constexpr std::string_view kParameterOpen = "<parameter=";
inline constexpr std::string_view kParameterClose = "</parameter>";

bool contains_call_opener(std::string_view text);

// Parses the first call in `text`. Leading prose is allowed; only the first call
// is consumed. Throws ParseError on unclosed tags, malformed names, duplicate
// parameters, or a nested "<function=" where a parameter is expected.
ParsedCall parse_transformed_call(std::string_view text);

std::string render_call(const ToolCall& call);

// Deterministic tool listing with one call template per tool, in input order.
// Throws E_EMPTY for an empty list.
std::string render_transformed_schema(const std::vector<ToolSchema>& tools);

}  // namespace agentos

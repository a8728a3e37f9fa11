#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace agentos {

// [A-Za-z_][A-Za-z0-9_]*
bool is_identifier(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapses every whitespace run to one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

// "Market Research Agent" -> "market_research_agent"
std::string snake_case(std::string_view name);

// Maximal runs of non-whitespace.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_at(std::string_view text, std::size_t pos, std::string_view prefix);

}  // namespace agentos

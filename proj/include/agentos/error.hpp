#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agentos {

enum class ErrorCode {
    unknown_tool,
    backend,
    unknown_agent,
    handoff_limit,
    parse,
    empty,
    script_exhausted,
    cassette_miss,
    xml,
    schema,
    action_type,
    unbound,
    invalid_form,
    output_undeclared,
    no_output,
    loop_limit,
    missing_output,
    missing_input,
    total_limit,
    phase_exhausted,
    too_few_agents,
    invalid_def,
    io,
    not_found,
    runner_refused,
    args,
    no_prior_search,
    usage,
    config,
};

// Stable wire name, e.g. "E_PARSE".
std::string_view code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_str() const { return code_name(code_); }

private:
    ErrorCode code_;
};

// Transformed-call grammar failure with the byte offset where parsing stopped.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string reason);

    std::size_t offset() const noexcept { return offset_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t offset_;
    std::string reason_;
};

}  // namespace agentos

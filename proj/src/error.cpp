#include "agentos/error.hpp"

namespace agentos {

std::string_view code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::unknown_tool: return "E_UNKNOWN_TOOL";
        case ErrorCode::backend: return "E_BACKEND";
        case ErrorCode::unknown_agent: return "E_UNKNOWN_AGENT";
        case ErrorCode::handoff_limit: return "E_HANDOFF_LIMIT";
        case ErrorCode::parse: return "E_PARSE";
        case ErrorCode::empty: return "E_EMPTY";
        case ErrorCode::script_exhausted: return "E_SCRIPT_EXHAUSTED";
        case ErrorCode::cassette_miss: return "E_CASSETTE_MISS";
        case ErrorCode::xml: return "E_XML";
        case ErrorCode::schema: return "E_SCHEMA";
        case ErrorCode::action_type: return "E_ACTION_TYPE";
        case ErrorCode::unbound: return "E_UNBOUND";
        case ErrorCode::invalid_form: return "E_INVALID_FORM";
        case ErrorCode::output_undeclared: return "E_OUTPUT_UNDECLARED";
        case ErrorCode::no_output: return "E_NO_OUTPUT";
        case ErrorCode::loop_limit: return "E_LOOP_LIMIT";
        case ErrorCode::missing_output: return "E_MISSING_OUTPUT";
        case ErrorCode::missing_input: return "E_MISSING_INPUT";
        case ErrorCode::total_limit: return "E_TOTAL_LIMIT";
        case ErrorCode::phase_exhausted: return "E_PHASE_EXHAUSTED";
        case ErrorCode::too_few_agents: return "E_TOO_FEW_AGENTS";
        case ErrorCode::invalid_def: return "E_INVALID_DEF";
        case ErrorCode::io: return "E_IO";
        case ErrorCode::not_found: return "E_NOT_FOUND";
        case ErrorCode::runner_refused: return "E_RUNNER_REFUSED";
        case ErrorCode::args: return "E_ARGS";
        case ErrorCode::no_prior_search: return "E_NO_PRIOR_SEARCH";
        case ErrorCode::usage: return "E_USAGE";
        case ErrorCode::config: return "E_CONFIG";
    }
    return "E_UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t offset, std::string reason)
    : Error(ErrorCode::parse, reason + " at offset " + std::to_string(offset)),
      offset_(offset),
      reason_(std::move(reason)) {}

}  // namespace agentos

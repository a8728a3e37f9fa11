#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace agentos {

// One line of a run trace:  seq TAB subject TAB action TAB key TAB detail
// Tabs, newlines and backslashes inside fields are backslash-escaped.
struct TraceRecord {
    std::size_t seq = 0;
    std::string subject;  // event name, phase name, or "workflow" / "pipeline"
    std::string action;   // START, RESULT, ABORT, GOTO, RESET, COMPLETED, ABORTED, PHASE, ATTEMPT, ...
    std::string key;
    std::string detail;

    bool operator==(const TraceRecord&) const = default;
};

std::string format_trace_line(const TraceRecord& r);
TraceRecord parse_trace_line(std::string_view line);
std::vector<TraceRecord> parse_trace(std::string_view text);

class TraceLog {
public:
    void add(std::string subject, std::string action, std::string key = {}, std::string detail = {});
    std::vector<TraceRecord> records() const;
    std::string render() const;
    void write(const std::filesystem::path& path) const;
    void append_to(const std::filesystem::path& path) const;

private:
    mutable std::mutex mutex_;
    std::vector<TraceRecord> records_;
};

}  // namespace agentos

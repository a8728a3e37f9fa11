#include "agentos/trace.hpp"

#include <fstream>

#include "agentos/error.hpp"

namespace agentos {

namespace {

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out.push_back(s[i]);
            continue;
        }
        switch (s[++i]) {
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: out.push_back(s[i]);
        }
    }
    return out;
}

}  // namespace

std::string format_trace_line(const TraceRecord& r) {
    return std::to_string(r.seq) + '\t' + escape(r.subject) + '\t' + escape(r.action) + '\t' + escape(r.key) + '\t' +
           escape(r.detail);
}

TraceRecord parse_trace_line(std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        f.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    if (f.size() != 5) throw Error(ErrorCode::io, "trace line needs 5 fields, got " + std::to_string(f.size()));
    TraceRecord r;
    try {
        r.seq = std::stoull(std::string(f[0]));
    } catch (const std::exception&) {
        throw Error(ErrorCode::io, "trace line has a bad sequence number");
    }
    r.subject = unescape(f[1]);
    r.action = unescape(f[2]);
    r.key = unescape(f[3]);
    r.detail = unescape(f[4]);
    return r;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
    std::vector<TraceRecord> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty()) out.push_back(parse_trace_line(line));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

void TraceLog::add(std::string subject, std::string action, std::string key, std::string detail) {
    std::lock_guard lock(mutex_);
    records_.push_back(
        TraceRecord{records_.size() + 1, std::move(subject), std::move(action), std::move(key), std::move(detail)});
}

std::vector<TraceRecord> TraceLog::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::string TraceLog::render() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& r : records_) out += format_trace_line(r) + '\n';
    return out;
}

void TraceLog::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::io, "cannot write trace " + path.string());
    f << render();
}

void TraceLog::append_to(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::app);
    if (!f) throw Error(ErrorCode::io, "cannot write trace " + path.string());
    f << render();
}

}  // namespace agentos

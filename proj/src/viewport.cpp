#include "agentos/viewport.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "agentos/error.hpp"
#include "agentos/text.hpp"
#include "agentos/tool_runner.hpp"

namespace agentos {

Viewport::Viewport(std::string content, std::size_t page_size)
    : content_(std::move(content)), folded_(to_lower(content_)), page_size_(page_size) {
    if (page_size_ == 0) throw Error(ErrorCode::args, "page size must be at least 1");
    page_count_ = std::max<std::size_t>(1, (content_.size() + page_size_ - 1) / page_size_);
}

std::string Viewport::page_text(std::size_t page) const {
    if (page < 1 || page > page_count_) return {};
    const std::size_t start = (page - 1) * page_size_;
    if (start >= content_.size()) return {};
    return content_.substr(start, page_size_);
}

std::string Viewport::view() const {
    std::string out = page_text(page_);
    if (!out.empty() && out.back() != '\n') out.push_back('\n');
    out += "=== page " + std::to_string(page_) + " of " + std::to_string(page_count_) + " ===";
    return out;
}

Viewport::Step Viewport::go(long long page) {
    Step s;
    const long long last = static_cast<long long>(page_count_);
    if (page < 1) {
        page = 1;
        s.clamped = true;
    } else if (page > last) {
        page = last;
        s.clamped = true;
    }
    page_ = static_cast<std::size_t>(page);
    s.view = view();
    if (s.clamped) s.view += page_ == 1 ? "\n(at first page)" : "\n(at last page)";
    return s;
}

Viewport::Step Viewport::up() { return go(static_cast<long long>(page_) - 1); }
Viewport::Step Viewport::down() { return go(static_cast<long long>(page_) + 1); }
Viewport::Step Viewport::to(long long page) { return go(page); }

Viewport::Hit Viewport::search_from(const std::string& needle, std::size_t from) {
    Hit h;
    const std::string n = to_lower(needle);
    const std::size_t at = from > folded_.size() ? std::string::npos : folded_.find(n, from);
    if (at == std::string::npos) {
        h.view = "(no match for \"" + needle + "\")\n" + view();
        return h;
    }
    h.found = true;
    h.offset = at;
    last_ = Search{needle, at};
    page_ = at / page_size_ + 1;
    h.view = view();
    return h;
}

Viewport::Hit Viewport::find(const std::string& needle) {
    if (needle.empty()) throw Error(ErrorCode::args, "search text is empty");
    return search_from(needle, (page_ - 1) * page_size_);
}

Viewport::Hit Viewport::find_next() {
    if (!last_) throw Error(ErrorCode::no_prior_search, "find_next needs a preceding find");
    return search_from(last_->needle, last_->position + 1);
}

std::string ViewportSession::open(std::string content) {
    std::lock_guard lock(mutex_);
    viewport_ = Viewport(std::move(content), page_size_);
    return viewport_.view();
}

void register_viewport_primitives(ToolRunner& runner, std::shared_ptr<ViewportSession> session) {
    ToolRunner* r = &runner;
    runner.add_primitive({ToolSchema{"open_local_file",
                                     "Open a text file in the paged viewer and show its first page.",
                                     {{"path", "File path relative to the working directory", true}}},
                          [r, session](const Arguments& a) {
                              std::ifstream in(r->confine(a.at("path")), std::ios::binary);
                              if (!in) return ToolResult::failure("E_IO", "cannot read " + a.at("path"));
                              std::ostringstream ss;
                              ss << in.rdbuf();
                              return ToolResult::success(session->open(ss.str()));
                          }});
    runner.add_primitive({ToolSchema{"page_up", "Show the previous page of the open document.", {}},
                          [session](const Arguments&) {
                              return ToolResult::success(session->with([](Viewport& v) { return v.up().view; }));
                          }});
    runner.add_primitive({ToolSchema{"page_down", "Show the next page of the open document.", {}},
                          [session](const Arguments&) {
                              return ToolResult::success(session->with([](Viewport& v) { return v.down().view; }));
                          }});
    runner.add_primitive({ToolSchema{"page_to",
                                     "Jump to a page of the open document; pages are numbered from 1.",
                                     {{"page", "Page number", true}}},
                          [session](const Arguments& a) {
                              long long n = 0;
                              try {
                                  n = std::stoll(a.at("page"));
                              } catch (const std::exception&) {
                                  return ToolResult::failure("E_ARGS", "page is not a number");
                              }
                              return ToolResult::success(session->with([n](Viewport& v) { return v.to(n).view; }));
                          }});
    runner.add_primitive({ToolSchema{"find_on_page_ctrl_f",
                                     "Search the open document, starting at the current page, and jump to the "
                                     "first match.",
                                     {{"search_string", "Text to look for (case-insensitive)", true}}},
                          [session](const Arguments& a) {
                              return ToolResult::success(
                                  session->with([&](Viewport& v) { return v.find(a.at("search_string")).view; }));
                          }});
    runner.add_primitive({ToolSchema{"find_next", "Jump to the next match of the last search.", {}},
                          [session](const Arguments&) {
                              return ToolResult::success(session->with([](Viewport& v) { return v.find_next().view; }));
                          }});
}

}  // namespace agentos

#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace agentos {

class ToolRunner;

constexpr std::size_t kDefaultPageSize = 4096;

// Page sizes and offsets are in bytes.
class Viewport {
public:
    struct Search {
        std::string needle;
        std::size_t position = 0;  // offset of the last match
    };

    struct Step {
        std::string view;
        bool clamped = false;
    };

    struct Hit {
        bool found = false;
        std::size_t offset = 0;
        std::string view;
    };

    explicit Viewport(std::string content = {}, std::size_t page_size = kDefaultPageSize);

    std::size_t page_count() const noexcept { return page_count_; }
    std::size_t current_page() const noexcept { return page_; }
    std::size_t page_size() const noexcept { return page_size_; }
    const std::string& content() const noexcept { return content_; }
    const std::optional<Search>& last_search() const noexcept { return last_; }

    // 1-based.
    std::string page_text(std::size_t page) const;
    // Current page body followed by "=== page i of N ===".
    std::string view() const;

    Step up();
    Step down();
    Step to(long long page);

    // Case-insensitive search from the start of the current page. A miss leaves
    // the viewport unchanged.
    Hit find(const std::string& needle);
    // Continues one byte past the last match, without wrapping. Throws
    // E_NO_PRIOR_SEARCH when no find preceded it.
    Hit find_next();

private:
    Step go(long long page);
    Hit search_from(const std::string& needle, std::size_t from);

    std::string content_;
    std::string folded_;
    std::size_t page_size_;
    std::size_t page_count_;
    std::size_t page_ = 1;
    std::optional<Search> last_;
};

// Holds the viewport an agent is reading and exposes it as tools:
// open_local_file, page_up, page_down, page_to, find_on_page_ctrl_f, find_next.
class ViewportSession {
public:
    explicit ViewportSession(std::size_t page_size = kDefaultPageSize) : page_size_(page_size) {}

    std::string open(std::string content);
    template <class F>
    auto with(F&& f) {
        std::lock_guard lock(mutex_);
        return f(viewport_);
    }

    std::size_t page_size() const noexcept { return page_size_; }

private:
    std::mutex mutex_;
    std::size_t page_size_;
    Viewport viewport_;
};

void register_viewport_primitives(ToolRunner& runner, std::shared_ptr<ViewportSession> session);

}  // namespace agentos

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "agentos/backend.hpp"
#include "agentos/registry.hpp"

namespace testing {

// Builtin entries for the tools the fixture forms list as existing.
void seed_existing_tools(agentos::Registry& registry);

// Tool editor turns that create each tool on the echo primitive and test it.
std::vector<agentos::ScriptStep> tool_editor_steps(const std::vector<std::string>& tools, bool test_run = true);

std::string davinci_form();
std::string wiki_form();

// Backend for the single-agent pipeline: profiling replies in order, then the
// editors, then (when `task_reply` is set) the DaVinci Agent answering the task.
std::shared_ptr<agentos::RoutingBackend> davinci_backend(const std::vector<std::string>& profiling_replies,
                                                         const std::string& task_reply = {});

// Backend for the wiki workflow pipeline, including the workflow run.
std::shared_ptr<agentos::RoutingBackend> wiki_backend(const std::vector<std::string>& profiling_replies);

// Replaces the first occurrence of `from` in `text`.
std::string replace_once(std::string text, const std::string& from, const std::string& to);

}  // namespace testing

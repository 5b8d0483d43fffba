#pragma once

#include <string>
#include <vector>

#include "tablerl/table.hpp"

namespace tablerl {

// Prompt templates are versioned constants, not configuration, so golden
// tests stay stable across releases.
inline constexpr const char* kPromptTemplateVersion = "v1";

struct PromptMessage {
  std::string role;  // "system" or "user"
  std::string content;
  bool operator==(const PromptMessage&) const = default;
};

const std::string& system_prompt();

// The user-facing prompt for one instance, with the table serialized in the
// requested format.
std::string render_prompt(const TaskInstance& instance, TableFormat format);

// Same content as render_prompt, as chat message records; when
// `include_system` the system prompt is prepended as its own record.
std::vector<PromptMessage> render_prompt_messages(const TaskInstance& instance,
                                                  TableFormat format,
                                                  bool include_system);

// The judge prompt for re-scoring a short-answer response against the gold
// list. `ground_truth` is rendered as a JSON array.
std::string render_judge_prompt(const std::string& response,
                                const std::vector<std::string>& ground_truth);

}  // namespace tablerl

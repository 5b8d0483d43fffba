#include "tablerl/prompts.hpp"

#include <algorithm>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace tablerl {

namespace {

const std::string kSystemPrompt =
    "A conversation between User and Assistant. The user asks a question, and "
    "the assistant solves it. The assistant first thinks about the reasoning "
    "process in the mind and then provides the user with the answer. The "
    "reasoning process and answer are enclosed within <think> </think> and "
    "<answer> </answer> tags, respectively, i.e., <think> reasoning process "
    "here </think> <answer> answer here </answer>.";

const std::string kTqaTemplate =
    R"(Instruction: This is a short-answer table QA task. Answer the question based on the provided table.

Table
Table Title: {table_title}
Table Content: {table_repr}

Question: {question}

Answer Format:
The final answer should be concise and use the following format:
```json
{
    "answer": [
        "answer1",
        "answer2",
        ...
    ]
}
```
)";

const std::string kTfvTemplate =
    R"(Instruction: This is a table fact verification task. The goal is to determine whether the given statement is entailed or refuted by the table.

Table
Table Title: {table_title}
Table Content: {table_repr}

Statement: {statement}

Answer Format:
The final answer should be either "entailed" or "refuted" and use the following format:
```json
{
    "answer": "entailed" or "refuted"
}
```
)";

const std::string kFftqaTemplate =
    R"(Instruction: This is a free-form table QA task. Answer the question based on the provided table.

Table
Table Title: {table_title}
Table Content: {table_repr}

Question: {question}

Answer Format:
The final answer should be a sentence and use the following format:
```json
{
    "answer": "your_generated_sentence_here"
}
```
)";

const std::string kJudgeTemplate =
    R"(You are given two answers for a short-answer Table QA task: response and ground_truth.

- response: This is the LLM's answer to the task. It may include reasoning steps and a final answer.
- ground_truth: A list of short answers, typically 2-3 word noun phrases or numbers.

Your task is to determine whether the response is fully correct, using these rules:
- Noun phrases: Considered correct if meaning matches ground_truth regardless of wording.
- Numbers: Considered correct if numerically close (tolerance < 0.01).
- Every ground_truth item must be matched in the response. Order doesn't matter.

Your output must be in the following format:
```json
{
    "judgement": "correct" or "incorrect"
}
```
Do not provide any explanation or additional output.

Input:
Response: {response}
Ground_truth: {ground_truth}

Evaluate and output the judgement.
)";

// Slot positions are located on the pristine template before any splicing,
// so values containing "{slot}"-looking text cannot be re-expanded.
std::string fill(const std::string& tmpl,
                 std::initializer_list<std::pair<const char*, const std::string*>>
                     slots) {
  struct Hit {
    size_t pos;
    size_t len;
    const std::string* value;
  };
  std::vector<Hit> hits;
  for (const auto& [slot, value] : slots) {
    const size_t pos = tmpl.find(slot);
    if (pos != std::string::npos) {
      hits.push_back({pos, std::string_view(slot).size(), value});
    }
  }
  std::sort(hits.begin(), hits.end(),
            [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
  std::string out;
  size_t cursor = 0;
  for (const auto& hit : hits) {
    out.append(tmpl, cursor, hit.pos - cursor);
    out.append(*hit.value);
    cursor = hit.pos + hit.len;
  }
  out.append(tmpl, cursor, tmpl.size() - cursor);
  return out;
}

}  // namespace

const std::string& system_prompt() { return kSystemPrompt; }

std::string render_prompt(const TaskInstance& instance, TableFormat format) {
  validate(instance);
  const std::string* tmpl = nullptr;
  const char* query_slot = "{question}";
  switch (instance.task) {
    case TaskKind::tqa:
      tmpl = &kTqaTemplate;
      break;
    case TaskKind::tfv:
      tmpl = &kTfvTemplate;
      query_slot = "{statement}";
      break;
    case TaskKind::fftqa:
      tmpl = &kFftqaTemplate;
      break;
  }
  const std::string title = instance.table.title.value_or(std::string());
  const std::string repr = render_table(instance.table, format);
  return fill(*tmpl, {{"{table_title}", &title},
                      {"{table_repr}", &repr},
                      {query_slot, &instance.query}});
}

std::vector<PromptMessage> render_prompt_messages(const TaskInstance& instance,
                                                  TableFormat format,
                                                  bool include_system) {
  std::vector<PromptMessage> messages;
  if (include_system) messages.push_back({"system", system_prompt()});
  messages.push_back({"user", render_prompt(instance, format)});
  return messages;
}

std::string render_judge_prompt(const std::string& response,
                                const std::vector<std::string>& ground_truth) {
  const std::string gold = nlohmann::json(ground_truth).dump();
  return fill(kJudgeTemplate,
              {{"{response}", &response}, {"{ground_truth}", &gold}});
}

}  // namespace tablerl

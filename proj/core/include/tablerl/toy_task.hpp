#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "tablerl/table.hpp"

namespace tablerl {

// Synthetic table-reasoning templates over a small integer grid. The gold
// answer is computed directly from the grid, so every task is verifiable.
enum class ToyTemplate {
  cell_lookup,
  column_max,
  column_min,
  count_equal,
  claim_compare,  // TFV; all others are TQA
};

const char* to_string(ToyTemplate t);

struct ToyTemplateMix {
  // Relative weights in ToyTemplate order; negative weights are invalid.
  std::array<double, 5> weights{1.0, 1.0, 1.0, 1.0, 1.0};
};

struct TinyTabTask {
  TaskInstance instance;
  ToyTemplate tmpl = ToyTemplate::cell_lookup;
  uint64_t rng_seed = 0;
};

// Pure function of (seed, mix): a 2-4 column grid with 3-6 data rows of
// integer cells in [0,99], one templated question, and its computed gold.
TinyTabTask generate_task(uint64_t seed, const ToyTemplateMix& mix);

// Compact conditioning text for the toy policy: markdown table + query.
// The full prompt template is only needed for real LLMs; the toy model
// reads this reduced view (truncated to max_chars).
std::string policy_prompt(const TinyTabTask& task, size_t max_chars);

// splitmix64-style mixing for deriving stream seeds.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace tablerl

#include "tablerl/toy_task.hpp"

#include <algorithm>
#include <cmath>

namespace tablerl {

const char* to_string(ToyTemplate t) {
  switch (t) {
    case ToyTemplate::cell_lookup:
      return "cell_lookup";
    case ToyTemplate::column_max:
      return "column_max";
    case ToyTemplate::column_min:
      return "column_min";
    case ToyTemplate::count_equal:
      return "count_equal";
    case ToyTemplate::claim_compare:
      return "claim_compare";
  }
  return "?";
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Small deterministic generator; std distributions are implementation
// defined, so draws are hand-rolled.
struct Rng {
  uint64_t state;
  uint64_t next() {
    state = mix_seed(state, 0x2545f4914f6cdd1dULL);
    return state;
  }
  int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

constexpr std::array<const char*, 4> kColumnNames = {"A", "B", "C", "D"};

ToyTemplate pick_template(Rng& rng, const ToyTemplateMix& mix) {
  double total = 0.0;
  for (double w : mix.weights) {
    if (w < 0.0 || !std::isfinite(w)) throw Error("invalid template mix weight");
    total += w;
  }
  if (total <= 0.0) throw Error("template mix has no positive weight");
  double u = rng.unit() * total;
  for (size_t i = 0; i < mix.weights.size(); ++i) {
    u -= mix.weights[i];
    if (u < 0.0) return static_cast<ToyTemplate>(i);
  }
  return ToyTemplate::claim_compare;
}

}  // namespace

TinyTabTask generate_task(uint64_t seed, const ToyTemplateMix& mix) {
  Rng rng{mix_seed(seed, 0)};
  TinyTabTask task;
  task.rng_seed = seed;
  task.tmpl = pick_template(rng, mix);

  const int data_rows = 3 + rng.below(4);  // 3..6
  const int cols = 2 + rng.below(3);       // 2..4

  GridTable grid;
  std::vector<std::string> header;
  for (int c = 0; c < cols; ++c) header.emplace_back(kColumnNames[c]);
  grid.rows.push_back(std::move(header));
  std::vector<std::vector<int>> values(data_rows, std::vector<int>(cols));
  for (int r = 0; r < data_rows; ++r) {
    std::vector<std::string> row;
    for (int c = 0; c < cols; ++c) {
      values[r][c] = rng.below(100);
      row.push_back(std::to_string(values[r][c]));
    }
    grid.rows.push_back(std::move(row));
  }

  TaskInstance& instance = task.instance;
  instance.id = "tinytab-" + std::to_string(seed);
  instance.table.content = std::move(grid);
  instance.metadata["template"] = to_string(task.tmpl);

  const auto column_name = [](int c) { return std::string(kColumnNames[c]); };

  switch (task.tmpl) {
    case ToyTemplate::cell_lookup: {
      const int r = rng.below(data_rows);
      const int c = rng.below(cols);
      instance.task = TaskKind::tqa;
      instance.query = "What is the value in row " + std::to_string(r + 1) +
                       " of column " + column_name(c) + "?";
      instance.gold = ShortList{{std::to_string(values[r][c])}};
      break;
    }
    case ToyTemplate::column_max:
    case ToyTemplate::column_min: {
      const int c = rng.below(cols);
      int best = values[0][c];
      for (int r = 1; r < data_rows; ++r) {
        best = task.tmpl == ToyTemplate::column_max ? std::max(best, values[r][c])
                                                    : std::min(best, values[r][c]);
      }
      instance.task = TaskKind::tqa;
      instance.query = std::string("What is the ") +
                       (task.tmpl == ToyTemplate::column_max ? "maximum" : "minimum") +
                       " value in column " + column_name(c) + "?";
      instance.gold = ShortList{{std::to_string(best)}};
      break;
    }
    case ToyTemplate::count_equal: {
      const int c = rng.below(cols);
      const int target = values[rng.below(data_rows)][c];  // count >= 1
      int count = 0;
      for (int r = 0; r < data_rows; ++r) count += values[r][c] == target;
      instance.task = TaskKind::tqa;
      instance.query = "How many cells in column " + column_name(c) +
                       " are equal to " + std::to_string(target) + "?";
      instance.gold = ShortList{{std::to_string(count)}};
      break;
    }
    case ToyTemplate::claim_compare: {
      const int r1 = rng.below(data_rows), c1 = rng.below(cols);
      const int r2 = rng.below(data_rows), c2 = rng.below(cols);
      instance.task = TaskKind::tfv;
      instance.query = "The value in row " + std::to_string(r1 + 1) +
                       " of column " + column_name(c1) +
                       " is greater than the value in row " +
                       std::to_string(r2 + 1) + " of column " + column_name(c2) +
                       ".";
      instance.gold = Label{values[r1][c1] > values[r2][c2] ? TfvLabel::entailed
                                                            : TfvLabel::refuted};
      break;
    }
  }
  validate(instance);
  return task;
}

std::string policy_prompt(const TinyTabTask& task, size_t max_chars) {
  std::string text = render_table(task.instance.table, TableFormat::markdown);
  text.push_back('\n');
  text += task.instance.query;
  if (text.size() > max_chars) text.resize(max_chars);
  return text;
}

}  // namespace tablerl

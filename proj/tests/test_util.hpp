#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "tablerl/table.hpp"

namespace testutil {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::string golden_path(const std::string& name) {
  return std::string(TABLERL_TEST_DIR) + "/golden/" + name;
}

inline std::string fixture_path(const std::string& name) {
  return std::string(TABLERL_TEST_DIR) + "/fixtures/" + name;
}

// The table shared by the prompt golden files.
inline tablerl::Table medals_table() {
  tablerl::Table table;
  table.title = "Olympic Medals";
  table.content = tablerl::GridTable{{{"Country", "Gold", "Silver"},
                                      {"Norway", "16", "8"},
                                      {"Germany", "12", "10"},
                                      {"Canada", "4", "8"}}};
  return table;
}

inline tablerl::TaskInstance golden_instance(tablerl::TaskKind task) {
  tablerl::TaskInstance instance;
  instance.table = medals_table();
  instance.task = task;
  switch (task) {
    case tablerl::TaskKind::tqa:
      instance.id = "golden-tqa";
      instance.query = "Which country won 16 gold medals?";
      instance.gold = tablerl::ShortList{{"Norway"}};
      break;
    case tablerl::TaskKind::tfv:
      instance.id = "golden-tfv";
      instance.query = "Germany won more gold medals than Norway.";
      instance.gold = tablerl::Label{tablerl::TfvLabel::refuted};
      break;
    case tablerl::TaskKind::fftqa:
      instance.id = "golden-fftqa";
      instance.query = "Summarize Norway's medal performance.";
      instance.gold = tablerl::Sentence{"Norway won 16 gold and 8 silver medals."};
      break;
  }
  return instance;
}

// xorshift-style generator for property tests (independent of the library's
// seeding helpers).
struct Rand {
  uint64_t s;
  explicit Rand(uint64_t seed) : s(seed ? seed : 0x9e3779b9ULL) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
};

}  // namespace testutil

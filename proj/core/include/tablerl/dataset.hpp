#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tablerl/table.hpp"

namespace tablerl {

// One model's sampled responses for one instance (n >= 1 enables pass@k).
struct PredictionRecord {
  std::string instance_id;
  std::vector<std::string> responses;
  std::string model_tag;
};

// Dataset record <-> JSON, schema:
//   {"id": str, "task": "tqa"|"tfv"|"fftqa",
//    "table": {"title": str|null, "grid": [[str]]}
//           | {"title": str|null, "pre_rendered": str, "format": "markdown"|"html"},
//    "query": str,
//    "gold": [str, ...] | "entailed" | "refuted" | {"sentence": str},
//    "metadata": {str: str, ...}}   (metadata optional)
nlohmann::json to_json(const TaskInstance& instance);
TaskInstance task_instance_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const PredictionRecord& record);
PredictionRecord prediction_record_from_json(const nlohmann::json& doc);

// Line-delimited JSON ingestion. In strict mode the first bad line raises
// SchemaError (line numbers 1-based); otherwise bad lines are skipped and
// their diagnostics appended to `errors` when provided.
std::vector<TaskInstance> ingest_dataset(const std::string& path,
                                         bool strict = true,
                                         std::vector<std::string>* errors = nullptr);

std::vector<PredictionRecord> ingest_predictions(
    const std::string& path, bool strict = true,
    std::vector<std::string>* errors = nullptr);

}  // namespace tablerl

#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "tablerl/rewards.hpp"

namespace tablerl {

// Stateless HTTP scoring service:
//   POST /v1/score   {"instance": <dataset record>, "responses": [str, ...],
//                     "config": {numeric RewardConfig overrides, optional}}
//                 -> {"breakdowns": [...], "engine_version": str, "timing_ms": num}
//   GET  /healthz -> {"engine_version": str}
// Schema violations return 400 with {"error": {"code", "message"}}; internal
// failures return 500 with an opaque error id only.
class RewardService {
 public:
  explicit RewardService(RewardConfig base_config);
  ~RewardService();

  RewardService(const RewardService&) = delete;
  RewardService& operator=(const RewardService&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port;
  // call port() afterwards. Throws IoError when the address is not bindable.
  void start(const std::string& host, int port);
  void stop();
  int port() const;
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Pure request handler behind the HTTP layer, also the in-process reference
// for the service-equivalence tests. Throws SchemaError/BadConfig for
// invalid requests.
nlohmann::json score_request(const nlohmann::json& request,
                             const RewardConfig& base_config);

// Applies the numeric override fields allowed per request.
RewardConfig apply_config_overrides(const RewardConfig& base,
                                    const nlohmann::json& overrides);

}  // namespace tablerl

#include "tablerl/service.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "tablerl/dataset.hpp"
#include "tablerl/version.hpp"

namespace tablerl {

using nlohmann::json;

RewardConfig apply_config_overrides(const RewardConfig& base,
                                    const json& overrides) {
  if (overrides.is_null()) return base;
  if (!overrides.is_object()) {
    throw BadConfig("config overrides must be an object");
  }
  RewardConfig config = base;
  for (const auto& [key, value] : overrides.items()) {
    if (key == "format_stage_rewards") {
      if (!value.is_array() || value.size() != config.format_stage_rewards.size()) {
        throw BadConfig("format_stage_rewards must be an array of 5 numbers");
      }
      for (size_t i = 0; i < config.format_stage_rewards.size(); ++i) {
        if (!value[i].is_number()) {
          throw BadConfig("format_stage_rewards entries must be numbers");
        }
        config.format_stage_rewards[i] = value[i].get<double>();
      }
      continue;
    }
    if (!value.is_number()) {
      throw BadConfig("override '" + key + "' must be numeric");
    }
    const double v = value.get<double>();
    if (key == "accuracy_weight") {
      config.accuracy_weight = v;
    } else if (key == "format_weight") {
      config.format_weight = v;
    } else if (key == "fftqa_bleu_weight") {
      config.fftqa_bleu_weight = v;
    } else if (key == "fftqa_rouge_weight") {
      config.fftqa_rouge_weight = v;
    } else {
      throw BadConfig("unknown config override '" + key + "'");
    }
  }
  validate(config);
  return config;
}

namespace {

json breakdown_to_json(const RewardBreakdown& b) {
  return json{{"accuracy", b.accuracy},
              {"format", b.format},
              {"total", b.total},
              {"task", to_string(b.task)},
              {"format_stage", b.format_stage}};
}

}  // namespace

json score_request(const json& request, const RewardConfig& base_config) {
  const auto started = std::chrono::steady_clock::now();
  if (!request.is_object()) throw SchemaError(0, "", "request body must be a JSON object");
  if (!request.contains("instance")) throw SchemaError(0, "instance", "missing");
  const TaskInstance instance = task_instance_from_json(request.at("instance"));
  if (!request.contains("responses") || !request.at("responses").is_array() ||
      request.at("responses").empty()) {
    throw SchemaError(0, "responses", "expected a non-empty array of strings");
  }
  std::vector<std::string> responses;
  for (const auto& r : request.at("responses")) {
    if (!r.is_string()) throw SchemaError(0, "responses", "entries must be strings");
    responses.push_back(r.get<std::string>());
  }
  const RewardConfig config = apply_config_overrides(
      base_config, request.contains("config") ? request.at("config") : json());

  const auto breakdowns = batch_rewards(responses, instance, config);
  json out;
  out["breakdowns"] = json::array();
  for (const auto& b : breakdowns) out["breakdowns"].push_back(breakdown_to_json(b));
  out["engine_version"] = kEngineVersion;
  out["timing_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
  return out;
}

struct RewardService::Impl {
  RewardConfig config;
  httplib::Server server;
  std::thread thread;
  std::atomic<int> port{0};
  std::atomic<bool> running{false};
};

RewardService::RewardService(RewardConfig base_config)
    : impl_(std::make_unique<Impl>()) {
  validate(base_config);
  impl_->config = std::move(base_config);

  impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"engine_version", kEngineVersion}}.dump(),
                    "application/json");
  });

  impl_->server.Post("/v1/score", [this](const httplib::Request& req,
                                         httplib::Response& res) {
    auto fail = [&res](int status, const std::string& code,
                       const std::string& message) {
      res.status = status;
      res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(),
                      "application/json");
    };
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      fail(400, "invalid_json", "request body is not valid JSON");
      return;
    }
    try {
      res.set_content(score_request(body, impl_->config).dump(),
                      "application/json");
    } catch (const SchemaError& e) {
      fail(400, "schema_error", e.what());
    } catch (const BadConfig& e) {
      fail(400, "invalid_config", e.what());
    } catch (const Error& e) {
      fail(400, "bad_request", e.what());
    } catch (const std::exception&) {
      // Never leak internal state: opaque id only.
      static std::atomic<uint64_t> counter{0};
      res.status = 500;
      res.set_content(
          json{{"error",
                {{"code", "internal"},
                 {"id", "err-" + std::to_string(++counter)}}}}.dump(),
          "application/json");
    }
  });
}

RewardService::~RewardService() { stop(); }

void RewardService::start(const std::string& host, int port) {
  if (impl_->running.load()) throw Error("service already running");
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host + " to any port");
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw IoError("cannot bind " + host + ":" + std::to_string(port));
    }
  }
  impl_->port.store(bound);
  impl_->running.store(true);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void RewardService::stop() {
  if (!impl_) return;
  if (impl_->running.exchange(false)) {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
  }
}

int RewardService::port() const { return impl_->port.load(); }

bool RewardService::running() const { return impl_->running.load(); }

}  // namespace tablerl

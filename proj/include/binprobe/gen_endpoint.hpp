#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#ifdef _res
#undef _res  // glibc resolv.h macro leaks through the socket headers and breaks Eigen
#endif

#include "binprobe/errors.hpp"
#include "binprobe/wire.hpp"

namespace binprobe {

class GenerationEndpoint {
 public:
  virtual ~GenerationEndpoint() = default;
  virtual GenerationResponse generate(const GenerationRequest& req) = 0;
};

struct RetryPolicy {
  int attempts = 3;
  int initial_backoff_ms = 100;
  double multiplier = 2.0;
};

/// Runs `fn` under the retry policy; after the final failed attempt, throws
/// EndpointError carrying the attempt count and the last failure message.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  if (policy.attempts < 1) throw ConfigError("retry policy needs at least one attempt");
  double backoff = policy.initial_backoff_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= policy.attempts; ++attempt) {
    try {
      return fn();
    } catch (const Error& e) {
      last_error = e.what();
    }
    if (attempt < policy.attempts && backoff > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(backoff)));
      backoff *= policy.multiplier;
    }
  }
  throw EndpointError(last_error, policy.attempts);
}

class HttpGenerationEndpoint : public GenerationEndpoint {
 public:
  HttpGenerationEndpoint(std::string host, int port, std::string path = "/generate",
                         int timeout_seconds = 120)
      : host_(std::move(host)), port_(port), path_(std::move(path)),
        timeout_seconds_(timeout_seconds) {}

  GenerationResponse generate(const GenerationRequest& req) override {
    validate(req);
    httplib::Client client(host_, port_);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_connection_timeout(timeout_seconds_, 0);
    auto res = client.Post(path_, to_json(req).dump(), "application/json");
    if (!res) throw Error("generation endpoint unreachable: " + host_ + ":" + std::to_string(port_));
    if (res->status != 200)
      throw Error("generation endpoint returned HTTP " + std::to_string(res->status));
    Json body;
    try {
      body = Json::parse(res->body);
    } catch (const Json::exception& e) {
      throw Error(std::string("generation endpoint sent invalid JSON: ") + e.what());
    }
    return generation_response_from_json(body);
  }

 private:
  std::string host_;
  int port_;
  std::string path_;
  int timeout_seconds_;
};

/// File-backed mock: responses live in a fixture directory as
/// <request-hash>.json. A missing fixture is treated as an endpoint failure so
/// retry/error paths behave like the real thing.
class MockGenerationEndpoint : public GenerationEndpoint {
 public:
  explicit MockGenerationEndpoint(std::filesystem::path fixtures_dir)
      : dir_(std::move(fixtures_dir)) {}

  GenerationResponse generate(const GenerationRequest& req) override {
    validate(req);
    auto path = dir_ / (request_hash(req) + ".json");
    std::ifstream in(path);
    if (!in) throw Error("no fixture " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Json body;
    try {
      body = Json::parse(buf.str());
    } catch (const Json::exception& e) {
      throw CacheCorruption("fixture " + path.string() + " is invalid JSON: " + e.what());
    }
    return generation_response_from_json(body);
  }

  /// Writes a fixture answering exactly `req`.
  void record(const GenerationRequest& req, const GenerationResponse& resp) const {
    std::filesystem::create_directories(dir_);
    std::ofstream out(dir_ / (request_hash(req) + ".json"));
    out << to_json(resp).dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
};

/// In-memory endpoint driven by a handler function; thread-safe call counter
/// for asserting network behavior in tests.
class ScriptedGenerationEndpoint : public GenerationEndpoint {
 public:
  using Handler = std::function<GenerationResponse(const GenerationRequest&)>;

  explicit ScriptedGenerationEndpoint(Handler handler) : handler_(std::move(handler)) {}

  GenerationResponse generate(const GenerationRequest& req) override {
    validate(req);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++calls_;
    }
    return handler_(req);
  }

  int calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
  }

 private:
  Handler handler_;
  mutable std::mutex mutex_;
  int calls_ = 0;
};

}  // namespace binprobe

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#ifdef _res
#undef _res  // glibc resolv.h macro leaks through the socket headers and breaks Eigen
#endif

#include "binprobe/errors.hpp"
#include "binprobe/wire.hpp"

namespace binprobe {

class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
  virtual std::string id() const = 0;
};

class HttpChatEndpoint : public ChatEndpoint {
 public:
  HttpChatEndpoint(std::string host, int port, std::string path = "/chat",
                   std::string api_key_env = "", int timeout_seconds = 300)
      : host_(std::move(host)), port_(port), path_(std::move(path)),
        api_key_env_(std::move(api_key_env)), timeout_seconds_(timeout_seconds) {}

  ChatResponse complete(const ChatRequest& req) override {
    httplib::Client client(host_, port_);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_connection_timeout(timeout_seconds_, 0);
    httplib::Headers headers;
    if (!api_key_env_.empty()) {
      const char* key = std::getenv(api_key_env_.c_str());
      if (!key || !*key)
        throw ConfigError("environment variable " + api_key_env_ + " is not set");
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(path_, headers, to_json(req).dump(), "application/json");
    if (!res) throw Error("chat endpoint unreachable: " + host_ + ":" + std::to_string(port_));
    if (res->status != 200)
      throw Error("chat endpoint returned HTTP " + std::to_string(res->status));
    Json body;
    try {
      body = Json::parse(res->body);
    } catch (const Json::exception& e) {
      throw Error(std::string("chat endpoint sent invalid JSON: ") + e.what());
    }
    return chat_response_from_json(body);
  }

  std::string id() const override { return host_ + ":" + std::to_string(port_) + path_; }

 private:
  std::string host_;
  int port_;
  std::string path_;
  std::string api_key_env_;
  int timeout_seconds_;
};

/// Fixture-backed chat endpoint: <cache-key>.json files under a directory.
class MockChatEndpoint : public ChatEndpoint {
 public:
  explicit MockChatEndpoint(std::filesystem::path fixtures_dir) : dir_(std::move(fixtures_dir)) {}

  ChatResponse complete(const ChatRequest& req) override {
    auto path = dir_ / (chat_cache_key(req) + ".json");
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
    return chat_response_from_json(body);
  }

  void record(const ChatRequest& req, const ChatResponse& resp) const {
    std::filesystem::create_directories(dir_);
    std::ofstream out(dir_ / (chat_cache_key(req) + ".json"));
    out << to_json(resp).dump(2) << '\n';
  }

  std::string id() const override { return "mock:" + dir_.string(); }

 private:
  std::filesystem::path dir_;
};

class ScriptedChatEndpoint : public ChatEndpoint {
 public:
  using Handler = std::function<ChatResponse(const ChatRequest&)>;

  explicit ScriptedChatEndpoint(Handler handler, std::string id = "scripted")
      : handler_(std::move(handler)), id_(std::move(id)) {}

  ChatResponse complete(const ChatRequest& req) override {
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

  std::string id() const override { return id_; }

 private:
  Handler handler_;
  std::string id_;
  mutable std::mutex mutex_;
  int calls_ = 0;
};

/// Combined requests-per-second and max-in-flight limiter. acquire() blocks
/// until both a start slot (paced at 1/rps) and an in-flight slot are free.
class RateLimiter {
 public:
  RateLimiter(double requests_per_second, std::size_t max_in_flight)
      : min_interval_(requests_per_second > 0.0 ? 1.0 / requests_per_second : 0.0),
        max_in_flight_(max_in_flight == 0 ? 1 : max_in_flight) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
    if (min_interval_ > 0.0) {
      auto now = Clock::now();
      if (next_start_ > now) {
        auto wait_until = next_start_;
        next_start_ += std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(min_interval_));
        lock.unlock();
        std::this_thread::sleep_until(wait_until);
        return;
      }
      next_start_ = now + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(min_interval_));
    }
  }

  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (in_flight_ > 0) --in_flight_;
    }
    cv_.notify_one();
  }

 private:
  using Clock = std::chrono::steady_clock;
  double min_interval_;
  std::size_t max_in_flight_;
  std::size_t in_flight_ = 0;
  Clock::time_point next_start_ = Clock::now();
  std::mutex mutex_;
  std::condition_variable cv_;
};

/// Named model presets used in the experiments; any other id passes through.
inline const std::vector<std::string>& recoverer_model_presets() {
  static const std::vector<std::string> presets = {
      "gpt-3.5-turbo-1106",
      "claude-3-haiku-20240307",
      "gemini-1.0-pro",
  };
  return presets;
}

inline const std::string& judge_model_preset() {
  static const std::string preset = "gpt-4-turbo-2024-04-09";
  return preset;
}

}  // namespace binprobe

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "binprobe/errors.hpp"
#include "binprobe/wire.hpp"

namespace binprobe {

/// Content-addressed chat response cache: one <hex-key>.json file per entry.
/// Writes go through a temp file + rename, so concurrent writers of the same
/// key end with one intact value (last writer wins; values are deterministic
/// per key anyway).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& directory() const { return dir_; }

  std::optional<ChatResponse> get(const std::string& key) const {
    auto path = entry_path(key);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    Json body;
    try {
      body = Json::parse(buf.str());
    } catch (const Json::exception& e) {
      throw CacheCorruption("cache entry " + path.string() + " is invalid JSON: " + e.what());
    }
    try {
      return chat_response_from_json(body);
    } catch (const Error& e) {
      throw CacheCorruption("cache entry " + path.string() + ": " + e.what());
    }
  }

  void put(const std::string& key, const ChatResponse& resp) const {
    auto final_path = entry_path(key);
    auto tmp_path = final_path;
    tmp_path += ".tmp" + std::to_string(
                    std::hash<std::thread::id>{}(std::this_thread::get_id()) & 0xffff);
    {
      std::ofstream out(tmp_path);
      if (!out) throw Error("cannot write cache entry " + tmp_path.string());
      out << to_json(resp).dump(2) << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
  }

  bool contains(const std::string& key) const {
    return std::filesystem::exists(entry_path(key));
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir_))
      if (e.path().extension() == ".json") ++n;
    return n;
  }

 private:
  std::filesystem::path entry_path(const std::string& key) const {
    for (char c : key)
      if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
        throw CacheCorruption("cache key must be a lowercase hex digest, got '" + key + "'");
    return dir_ / (key + ".json");
  }

  std::filesystem::path dir_;
};

}  // namespace binprobe

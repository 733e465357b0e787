#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "binprobe/asm_parser.hpp"
#include "binprobe/depgraph.hpp"
#include "binprobe/errors.hpp"
#include "binprobe/hash.hpp"

namespace binprobe {

using Json = nlohmann::json;

struct BinaryConditioning {
  std::string raw_asm;
  std::string dep_edges;

  std::string as_text() const {
    return dep_edges.empty() ? raw_asm : raw_asm + "\n" + dep_edges;
  }
};

inline BinaryConditioning make_conditioning(const AsmFunction& fn, const DependencyGraph& graph) {
  std::string listing = fn.raw_asm.empty() ? render_listing(fn) : fn.raw_asm;
  return {std::move(listing), serialize_edges(graph)};
}

enum class GenerationMode { Signature, Completion };

struct GenerationRequest {
  BinaryConditioning conditioning;
  GenerationMode mode = GenerationMode::Signature;
  std::string prefix;  // completion mode only
  double top_p = 0.75;
  int max_tokens = 256;
  std::optional<std::uint64_t> seed;
};

struct GenerationResponse {
  std::string text;
  std::string finish_reason;
};

inline void validate(const GenerationRequest& req) {
  if (!(req.top_p > 0.0) || req.top_p > 1.0)
    throw InvalidP(req.top_p);
  if (req.mode == GenerationMode::Completion && req.prefix.empty())
    throw EmptyInput("completion request requires a non-empty prefix");
}

inline Json to_json(const GenerationRequest& req) {
  Json j;
  j["conditioning"] = {{"raw_asm", req.conditioning.raw_asm},
                       {"dep_edges", req.conditioning.dep_edges}};
  j["mode"] = req.mode == GenerationMode::Signature ? "signature" : "completion";
  if (req.mode == GenerationMode::Completion) j["prefix"] = req.prefix;
  j["top_p"] = req.top_p;
  j["max_tokens"] = req.max_tokens;
  if (req.seed) j["seed"] = *req.seed;
  return j;
}

inline GenerationRequest generation_request_from_json(const Json& j) {
  GenerationRequest req;
  try {
    req.conditioning.raw_asm = j.at("conditioning").at("raw_asm").get<std::string>();
    req.conditioning.dep_edges = j.at("conditioning").at("dep_edges").get<std::string>();
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "signature")
      req.mode = GenerationMode::Signature;
    else if (mode == "completion")
      req.mode = GenerationMode::Completion;
    else
      throw Error("unknown mode '" + mode + "'");
    if (j.contains("prefix")) req.prefix = j.at("prefix").get<std::string>();
    req.top_p = j.at("top_p").get<double>();
    req.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("seed")) req.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed generation request: ") + e.what());
  }
  validate(req);
  return req;
}

inline Json to_json(const GenerationResponse& resp) {
  return Json{{"text", resp.text}, {"finish_reason", resp.finish_reason}};
}

inline GenerationResponse generation_response_from_json(const Json& j) {
  GenerationResponse resp;
  try {
    resp.text = j.at("text").get<std::string>();
    resp.finish_reason = j.value("finish_reason", std::string("stop"));
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed generation response: ") + e.what());
  }
  return resp;
}

/// Canonical digest of a generation request; keys sort alphabetically in the
/// serialized form, so field order in code cannot perturb fixture lookups.
inline std::string request_hash(const GenerationRequest& req) {
  return sha256_hex(to_json(req).dump());
}

struct ChatUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct ChatResponse {
  std::string content;
  std::optional<ChatUsage> usage;
};

inline Json to_json(const ChatRequest& req) {
  return Json{{"model", req.model},
              {"messages",
               {Json{{"role", "system"}, {"content", req.system}},
                Json{{"role", "user"}, {"content", req.user}}}},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};
}

inline ChatRequest chat_request_from_json(const Json& j) {
  ChatRequest req;
  try {
    req.model = j.at("model").get<std::string>();
    for (const auto& msg : j.at("messages")) {
      std::string role = msg.at("role").get<std::string>();
      if (role == "system")
        req.system = msg.at("content").get<std::string>();
      else if (role == "user")
        req.user = msg.at("content").get<std::string>();
    }
    req.temperature = j.at("temperature").get<double>();
    req.max_tokens = j.at("max_tokens").get<int>();
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed chat request: ") + e.what());
  }
  return req;
}

inline Json to_json(const ChatResponse& resp) {
  Json j{{"content", resp.content}};
  if (resp.usage)
    j["usage"] = {{"prompt_tokens", resp.usage->prompt_tokens},
                  {"completion_tokens", resp.usage->completion_tokens}};
  return j;
}

inline ChatResponse chat_response_from_json(const Json& j) {
  ChatResponse resp;
  try {
    resp.content = j.at("content").get<std::string>();
    if (j.contains("usage")) {
      ChatUsage usage;
      usage.prompt_tokens = j.at("usage").value("prompt_tokens", std::int64_t{0});
      usage.completion_tokens = j.at("usage").value("completion_tokens", std::int64_t{0});
      resp.usage = usage;
    }
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed chat response: ") + e.what());
  }
  return resp;
}

/// Chat cache key per the caching contract: model id, both message bodies, and
/// temperature participate; max_tokens does not.
inline std::string chat_cache_key(const ChatRequest& req) {
  Json j{{"model", req.model},
         {"system", req.system},
         {"user", req.user},
         {"temperature", req.temperature}};
  return sha256_hex(j.dump());
}

}  // namespace binprobe

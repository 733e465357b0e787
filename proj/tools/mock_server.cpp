// Offline stand-in for the generation and chat endpoints. Replays fixture
// files when present and, with --synthesize, fabricates deterministic
// responses so the whole pipeline can run end to end without keys.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "binprobe/binprobe.hpp"

namespace fs = std::filesystem;
using namespace binprobe;

namespace {

std::string read_fixture(const fs::path& dir, const std::string& key) {
  if (dir.empty()) return {};
  std::ifstream in(dir / (key + ".json"));
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

GenerationResponse synthesize_generation(const GenerationRequest& req) {
  std::string tag = sha256_hex(req.conditioning.as_text() + "|" +
                               std::to_string(req.seed.value_or(0)))
                        .substr(0, 6);
  GenerationResponse resp;
  if (req.mode == GenerationMode::Signature) {
    resp.text = "int fn_" + tag + "(int a, int b)";
  } else {
    resp.text = "{ return a + (int)0x" + tag.substr(0, 4) + "; }";
  }
  resp.finish_reason = "stop";
  return resp;
}

ChatResponse synthesize_chat(const ChatRequest& req) {
  std::string tag = sha256_hex(req.user).substr(0, 6);
  ChatResponse resp;
  if (req.user.find("Function Name:") != std::string::npos) {
    resp.content = "Analysis: the contexts describe routines similar to the decompiled one.\n"
                   "Function Name: recovered_" + tag;
  } else {
    resp.content = "Summary: The function transforms its input buffer and returns a status "
                   "code (variant " + tag + ").\n"
                   "Purpose: The purpose of the function seems to be data preparation.";
  }
  resp.usage = ChatUsage{static_cast<std::int64_t>(req.user.size() / 4),
                         static_cast<std::int64_t>(resp.content.size() / 4)};
  return resp;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixture-replaying mock for the generation and chat endpoints"};
  std::string host = "127.0.0.1";
  int port = 8089;
  std::string gen_fixtures, chat_fixtures;
  bool synthesize = false;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port");
  app.add_option("--gen-fixtures", gen_fixtures, "generation fixtures (request-hash.json)");
  app.add_option("--chat-fixtures", chat_fixtures, "chat fixtures (cache-key.json)");
  app.add_flag("--synthesize", synthesize, "fabricate deterministic responses on fixture miss");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;

  server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
    try {
      GenerationRequest parsed = generation_request_from_json(Json::parse(req.body));
      validate(parsed);
      std::string fixture = read_fixture(gen_fixtures, request_hash(parsed));
      if (!fixture.empty()) {
        res.set_content(fixture, "application/json");
        return;
      }
      if (synthesize) {
        res.set_content(to_json(synthesize_generation(parsed)).dump(), "application/json");
        return;
      }
      res.status = 404;
      res.set_content("no fixture for request " + request_hash(parsed), "text/plain");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  });

  server.Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
    try {
      ChatRequest parsed = chat_request_from_json(Json::parse(req.body));
      std::string fixture = read_fixture(chat_fixtures, chat_cache_key(parsed));
      if (!fixture.empty()) {
        res.set_content(fixture, "application/json");
        return;
      }
      if (synthesize) {
        res.set_content(to_json(synthesize_chat(parsed)).dump(), "application/json");
        return;
      }
      res.status = 404;
      res.set_content("no fixture for request " + chat_cache_key(parsed), "text/plain");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  });

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  std::cout << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "failed to bind " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

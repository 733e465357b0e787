#pragma once

#include <string>
#include <string_view>

#include "binprobe/chat_endpoint.hpp"
#include "binprobe/errors.hpp"
#include "binprobe/gen_endpoint.hpp"
#include "binprobe/prompts.hpp"
#include "binprobe/response_cache.hpp"

namespace binprobe {

enum class JudgeQuestion { ContextRelevance, Functionality };

struct JudgeVerdict {
  JudgeQuestion question = JudgeQuestion::ContextRelevance;
  int score = 0;  // 1..5
  std::string comment;
};

struct JudgeMaterials {
  std::string candidate_summary;
  std::string reference_summary;
  std::string dec_code;
  std::string src_code;
};

struct JudgeConfig {
  std::string model = "gpt-4-turbo-2024-04-09";
  double temperature = 0.0;
  int max_tokens = 1024;
  RetryPolicy retry;
};

inline std::string_view judge_rubric(JudgeQuestion q) {
  return q == JudgeQuestion::ContextRelevance ? kJudgeContextRelevance : kJudgeFunctionality;
}

/// Rubric verbatim, then the materials under fixed headings.
inline RenderedPrompt build_judge_prompt(JudgeQuestion question, const JudgeMaterials& m) {
  RenderedPrompt prompt;
  prompt.system = std::string(kSystemSrcDeveloper);
  std::string user(judge_rubric(question));
  user += "\nDecompiled code:\n```\n" + m.dec_code + "\n```\n";
  user += "\nSource code:\n```\n" + m.src_code + "\n```\n";
  user += "\nReference summary: " + m.reference_summary + "\n";
  user += "\nSummary to evaluate: " + m.candidate_summary + "\n";
  prompt.user = user;
  return prompt;
}

/// Last standalone integer in 1..5: a maximal digit run whose neighbors are
/// neither alphanumeric nor '.', so "4.5" and "10" never yield a score.
inline int parse_judge_score(std::string_view text) {
  int best = -1;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && is_digit(text[i])) ++i;
    bool left_ok = start == 0 || (!is_alnum(text[start - 1]) && text[start - 1] != '.');
    bool right_ok = i == text.size() || (!is_alnum(text[i]) && text[i] != '.');
    if (left_ok && right_ok && i - start == 1) {
      int value = text[start] - '0';
      if (value >= 1 && value <= 5) best = value;
    }
  }
  if (best < 0) throw UnparseableVerdict(std::string(text.substr(0, 120)));
  return best;
}

inline JudgeVerdict judge(JudgeQuestion question, const JudgeMaterials& materials,
                          const JudgeConfig& cfg, ChatEndpoint& endpoint, ResponseCache* cache) {
  RenderedPrompt prompt = build_judge_prompt(question, materials);
  ChatRequest req{cfg.model, prompt.system, prompt.user, cfg.temperature, cfg.max_tokens};
  ChatResponse resp;
  bool hit = false;
  std::string key = chat_cache_key(req);
  if (cache) {
    if (auto cached = cache->get(key)) {
      resp = std::move(*cached);
      hit = true;
    }
  }
  if (!hit) {
    resp = with_retries(cfg.retry, [&] { return endpoint.complete(req); });
    if (cache) cache->put(key, resp);
  }
  JudgeVerdict verdict;
  verdict.question = question;
  verdict.comment = resp.content;
  verdict.score = parse_judge_score(resp.content);
  return verdict;
}

/// Round-trippable rendering: parse_judge_score(render_verdict(v)) == v.score.
inline std::string render_verdict(const JudgeVerdict& v) {
  return v.comment + "\nScore: " + std::to_string(v.score);
}

}  // namespace binprobe

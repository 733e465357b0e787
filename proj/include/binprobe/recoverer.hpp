#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "binprobe/chat_endpoint.hpp"
#include "binprobe/errors.hpp"
#include "binprobe/gen_endpoint.hpp"
#include "binprobe/prompts.hpp"
#include "binprobe/response_cache.hpp"
#include "binprobe/strutil.hpp"

namespace binprobe {

struct RecovererConfig {
  std::string model = "gpt-3.5-turbo-1106";
  double temperature = 0.0;  // pinned for reproducible cached experiments
  int max_tokens = 1024;
  RetryPolicy retry;
  bool summary_only = false;  // score only the Summary section, not Summary+Purpose
};

struct Provenance {
  Task task = Task::SummarizeDec;
  PromptVariant variant = PromptVariant::Default;
  std::string endpoint_id;
  bool cache_hit = false;
};

struct RecoveryResult {
  std::string raw;
  std::optional<std::string> analysis;
  std::string answer;
  std::optional<ChatUsage> usage;
  Provenance provenance;
};

struct CallOutcome {
  ChatResponse response;
  bool cache_hit = false;
};

/// Cache-through chat call: on a hit no network traffic happens at all.
inline CallOutcome call_recoverer(const RenderedPrompt& prompt, const RecovererConfig& cfg,
                                  ChatEndpoint& endpoint, ResponseCache* cache) {
  ChatRequest req{cfg.model, prompt.system, prompt.user, cfg.temperature, cfg.max_tokens};
  std::string key = chat_cache_key(req);
  if (cache) {
    if (auto hit = cache->get(key)) return {std::move(*hit), true};
  }
  ChatResponse resp = with_retries(cfg.retry, [&] { return endpoint.complete(req); });
  if (cache) cache->put(key, resp);
  return {std::move(resp), false};
}

namespace detail {

/// Drop markdown fence lines and bold markers before marker search.
inline std::string strip_markdown(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (const auto& line : split_lines(raw)) {
    if (starts_with(trim(line), "```")) continue;
    out.append(line);
    out.push_back('\n');
  }
  std::string cleaned;
  cleaned.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i + 1 < out.size() && out[i] == '*' && out[i + 1] == '*') {
      ++i;
      continue;
    }
    cleaned.push_back(out[i]);
  }
  return cleaned;
}

inline const std::array<std::string_view, 5>& section_markers() {
  static const std::array<std::string_view, 5> markers = {
      "Description:", "Summary:", "Analysis:", "Purpose:", "Function Name:"};
  return markers;
}

inline bool at_line_start(std::string_view text, std::size_t pos) {
  while (pos > 0) {
    char c = text[pos - 1];
    if (c == '\n') return true;
    if (c != ' ' && c != '\t') return false;
    --pos;
  }
  return true;
}

/// Position just past the last line-initial occurrence of `marker`, or npos.
inline std::size_t find_last_marker(std::string_view text, std::string_view marker) {
  std::size_t best = std::string_view::npos;
  std::size_t pos = text.find(marker);
  while (pos != std::string_view::npos) {
    if (at_line_start(text, pos)) best = pos + marker.size();
    pos = text.find(marker, pos + 1);
  }
  return best;
}

/// First line-initial occurrence of any section marker at or after `from`.
inline std::size_t next_marker_start(std::string_view text, std::size_t from) {
  std::size_t best = std::string_view::npos;
  for (auto marker : section_markers()) {
    std::size_t pos = text.find(marker, from);
    while (pos != std::string_view::npos) {
      if (at_line_start(text, pos)) {
        if (pos < best) best = pos;
        break;
      }
      pos = text.find(marker, pos + 1);
    }
  }
  return best;
}

inline std::optional<std::string> section_text(std::string_view text, std::string_view marker) {
  std::size_t start = find_last_marker(text, marker);
  if (start == std::string_view::npos) return std::nullopt;
  std::size_t end = next_marker_start(text, start);
  return trim(text.substr(start, end == std::string_view::npos ? end : end - start));
}

inline std::string clean_name_token(std::string_view token) {
  std::string t = trim(token);
  auto is_wrap = [](char c) { return c == '`' || c == '"' || c == '\''; };
  while (!t.empty() && is_wrap(t.front())) t.erase(t.begin());
  while (!t.empty() && (is_wrap(t.back()) || t.back() == '.' || t.back() == ',' ||
                        t.back() == ';' || t.back() == ':' || t.back() == '!' ||
                        t.back() == '?' || t.back() == ')'))
    t.pop_back();
  return t;
}

}  // namespace detail

/// Extract analysis and answer from a raw recoverer response.
///  - name recovery: text after the last "Function Name:" marker, cleaned and
///    validated as a C identifier;
///  - summarization: Summary and Purpose sections concatenated (or Summary
///    alone with summary_only);
///  - analysis: the "Analysis:" section, captured for augmented variants.
inline RecoveryResult parse_answer(const std::string& raw, Task task, PromptVariant variant,
                                   bool summary_only = false) {
  if (raw.empty()) throw EmptyInput("recoverer response is empty");
  RecoveryResult result;
  result.raw = raw;
  result.provenance.task = task;
  result.provenance.variant = variant;

  std::string text = detail::strip_markdown(raw);
  if (variant == PromptVariant::Augmented)
    result.analysis = detail::section_text(text, "Analysis:");

  if (task == Task::NameRecovery) {
    std::size_t start = detail::find_last_marker(text, "Function Name:");
    if (start == std::string_view::npos) throw MissingMarker("Function Name:");
    std::string_view rest = std::string_view(text).substr(start);
    std::size_t eol = rest.find('\n');
    std::string name = detail::clean_name_token(rest.substr(0, eol));
    if (!is_identifier(name)) throw InvalidName(name);
    result.answer = name;
    return result;
  }

  auto summary = detail::section_text(text, "Summary:");
  auto purpose = detail::section_text(text, "Purpose:");
  if (summary_only) {
    if (!summary) throw MissingMarker("Summary:");
    result.answer = *summary;
  } else {
    if (!summary && !purpose) throw MissingMarker("Summary: / Purpose:");
    std::string answer;
    if (summary) answer = *summary;
    if (purpose) {
      if (!answer.empty()) answer += " ";
      answer += *purpose;
    }
    result.answer = answer;
  }
  if (result.answer.empty()) throw MissingMarker("summary sections are empty");
  return result;
}

/// One-stop call: render → cached chat call → parse, with provenance filled.
inline RecoveryResult recover(const PromptSpec& spec, const RecovererConfig& cfg,
                              ChatEndpoint& endpoint, ResponseCache* cache) {
  RenderedPrompt prompt = build_prompt(spec);
  CallOutcome outcome = call_recoverer(prompt, cfg, endpoint, cache);
  RecoveryResult result = parse_answer(outcome.response.content, spec.task, spec.variant,
                                       cfg.summary_only);
  result.usage = outcome.response.usage;
  result.provenance.endpoint_id = endpoint.id();
  result.provenance.cache_hit = outcome.cache_hit;
  return result;
}

}  // namespace binprobe

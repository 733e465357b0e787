#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "binprobe/errors.hpp"
#include "binprobe/strutil.hpp"

namespace binprobe {

namespace detail {

/// Blank out comments ('/*...*/', '//...') and preprocessor lines, preserving
/// string/char literals. Removed regions become spaces so tokens stay apart.
inline std::string strip_c_comments(std::string_view src) {
  std::string out;
  out.reserve(src.size());
  enum class State { Normal, Line, Block, Str, Chr, Preproc };
  State state = State::Normal;
  bool at_line_start = true;
  for (std::size_t i = 0; i < src.size(); ++i) {
    char c = src[i];
    char next = i + 1 < src.size() ? src[i + 1] : '\0';
    switch (state) {
      case State::Normal:
        if (c == '/' && next == '/') {
          state = State::Line;
          ++i;
        } else if (c == '/' && next == '*') {
          state = State::Block;
          out.push_back(' ');
          ++i;
        } else if (c == '#' && at_line_start) {
          state = State::Preproc;
        } else {
          if (c == '"') state = State::Str;
          if (c == '\'') state = State::Chr;
          out.push_back(c);
        }
        break;
      case State::Line:
      case State::Preproc:
        if (c == '\n') {
          state = State::Normal;
          out.push_back('\n');
        }
        break;
      case State::Block:
        if (c == '*' && next == '/') {
          state = State::Normal;
          ++i;
        } else if (c == '\n') {
          out.push_back('\n');
        }
        break;
      case State::Str:
        out.push_back(c);
        if (c == '\\' && next != '\0') {
          out.push_back(next);
          ++i;
        } else if (c == '"') {
          state = State::Normal;
        }
        break;
      case State::Chr:
        out.push_back(c);
        if (c == '\\' && next != '\0') {
          out.push_back(next);
          ++i;
        } else if (c == '\'') {
          state = State::Normal;
        }
        break;
    }
    if (c == '\n') at_line_start = true;
    else if (!is_space(c)) at_line_start = false;
  }
  return out;
}

/// Locate the '(' opening the parameter list within a signature fragment:
/// match back from the last ')', or fall back to the last '(' when the text
/// is truncated.
inline std::size_t find_param_open(std::string_view sig) {
  auto close = sig.rfind(')');
  if (close != std::string_view::npos) {
    int depth = 0;
    for (std::size_t i = close + 1; i-- > 0;) {
      if (sig[i] == ')') ++depth;
      if (sig[i] == '(') {
        --depth;
        if (depth == 0) return i;
      }
    }
    return std::string_view::npos;
  }
  return sig.rfind('(');
}

}  // namespace detail

/// Extract (signature, name) from C-like text that begins at a function
/// definition. The signature runs from the first non-comment character to the
/// token before the first top-level '{', whitespace-folded; preprocessor
/// lines count as comments.
inline std::pair<std::string, std::string> extract_signature(std::string_view src) {
  if (src.empty()) throw NoSignature();
  std::string cleaned = detail::strip_c_comments(src);
  auto brace = cleaned.find('{');
  std::string_view raw(cleaned);
  if (brace != std::string::npos) raw = raw.substr(0, brace);
  if (raw.find('(') == std::string_view::npos) throw NoSignature();

  auto param_open = detail::find_param_open(raw);
  if (param_open == std::string_view::npos) throw NoSignature();
  std::size_t end = param_open;
  while (end > 0 && is_space(raw[end - 1])) --end;
  std::size_t begin = end;
  while (begin > 0 && is_ident_char(raw[begin - 1])) --begin;
  std::string name(raw.substr(begin, end - begin));
  if (!is_identifier(name)) throw NoSignature();

  return {collapse_whitespace(raw), name};
}

/// Canonical form used to deduplicate sampled signatures: lowercase, fold
/// whitespace, drop parameter names but keep their types, tighten spacing
/// around punctuation.
inline std::string normalize_signature(std::string_view signature) {
  static const std::unordered_set<std::string> type_words = {
      "void",   "int",    "char",   "short", "long",     "unsigned", "signed",
      "float",  "double", "const",  "struct", "union",   "enum",     "volatile",
      "size_t", "ssize_t", "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t",
      "uint16_t", "uint32_t", "uint64_t", "bool", "restrict", "static", "inline"};

  std::string sig = collapse_whitespace(signature);
  auto param_open = detail::find_param_open(sig);
  std::string head = param_open == std::string::npos ? sig : sig.substr(0, param_open);
  std::string params;
  if (param_open != std::string::npos) {
    auto close = sig.rfind(')');
    std::size_t param_end = (close == std::string::npos || close < param_open) ? sig.size() : close;
    std::string_view inside(sig.data() + param_open + 1, param_end - param_open - 1);
    auto pieces = split_trimmed(inside, ',');
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      // find the last word token; drop it when it is a non-type identifier
      // and not the only word in the parameter
      std::vector<std::pair<std::size_t, std::size_t>> words;
      const std::string& p = pieces[i];
      std::size_t start = 0;
      for (std::size_t j = 0; j <= p.size(); ++j) {
        if (j < p.size() && is_ident_char(p[j])) continue;
        if (j > start) words.emplace_back(start, j);
        start = j + 1;
      }
      std::string cleaned = p;
      if (words.size() >= 2) {
        auto [b, e] = words.back();
        std::string last = p.substr(b, e - b);
        if (is_identifier(last) && type_words.count(lowercase(last)) == 0) {
          cleaned = trim(p.substr(0, b) + p.substr(e));
        }
      }
      if (i) params += ',';
      params += cleaned;
    }
  }
  std::string assembled = param_open == std::string::npos ? head : head + "(" + params + ")";
  // tighten spaces around punctuation, then lowercase
  std::string tight;
  for (std::size_t i = 0; i < assembled.size(); ++i) {
    char c = assembled[i];
    if (c == ' ') {
      char prev = tight.empty() ? '\0' : tight.back();
      char next = i + 1 < assembled.size() ? assembled[i + 1] : '\0';
      auto is_punct = [](char x) { return x == '(' || x == ')' || x == ',' || x == '*' || x == '[' || x == ']'; };
      if (is_punct(prev) || is_punct(next)) continue;
    }
    tight.push_back(c);
  }
  return lowercase(tight);
}

}  // namespace binprobe

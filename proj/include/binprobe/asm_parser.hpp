#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "binprobe/errors.hpp"
#include "binprobe/strutil.hpp"

namespace binprobe {

enum class OperandKind { Register, Immediate, Memory, Label };

struct Operand {
  OperandKind kind = OperandKind::Label;
  std::string text;                          // original token, verbatim
  std::optional<std::string> base_register;  // memory kind only
  bool written = false;
};

struct Instruction {
  std::size_t index = 0;
  std::string mnemonic;  // lowercase, no whitespace
  std::vector<Operand> operands;
};

struct AsmFunction {
  std::string id;
  std::vector<Instruction> instructions;
  std::string dec_code;  // decompiled C-like text
  std::string raw_asm;   // original listing
};

namespace detail {

/// x86-64 register table. Maps every alias to its canonical 64-bit name so
/// def-use tracks architectural registers, not operand widths.
inline const std::unordered_map<std::string, std::string>& register_aliases() {
  static const std::unordered_map<std::string, std::string> table = [] {
    std::unordered_map<std::string, std::string> t;
    auto add = [&t](std::initializer_list<const char*> names, const char* canon) {
      for (const char* n : names) t.emplace(n, canon);
    };
    add({"rax", "eax", "ax", "al", "ah"}, "rax");
    add({"rbx", "ebx", "bx", "bl", "bh"}, "rbx");
    add({"rcx", "ecx", "cx", "cl", "ch"}, "rcx");
    add({"rdx", "edx", "dx", "dl", "dh"}, "rdx");
    add({"rsi", "esi", "si", "sil"}, "rsi");
    add({"rdi", "edi", "di", "dil"}, "rdi");
    add({"rbp", "ebp", "bp", "bpl"}, "rbp");
    add({"rsp", "esp", "sp", "spl"}, "rsp");
    for (int i = 8; i <= 15; ++i) {
      std::string base = "r" + std::to_string(i);
      for (const char* suffix : {"", "d", "w", "b"}) t.emplace(base + suffix, base);
    }
    add({"rip", "eip"}, "rip");
    for (int i = 0; i <= 31; ++i) {
      for (const char* prefix : {"xmm", "ymm", "zmm"}) {
        std::string n = prefix + std::to_string(i);
        t.emplace(n, n);
      }
    }
    add({"cs", "ds", "es", "fs", "gs", "ss"}, "cs");  // segment aliases collapse; unused by def-use
    return t;
  }();
  return table;
}

inline bool is_register_name(std::string_view token) {
  return register_aliases().count(lowercase(token)) != 0;
}

/// Canonical 64-bit name for a register alias, or the lowercased input if unknown.
inline std::string canonical_register(std::string_view name) {
  std::string lower = lowercase(name);
  auto it = register_aliases().find(lower);
  return it == register_aliases().end() ? lower : it->second;
}

/// Mnemonics whose first operand is written without being read.
inline bool writes_without_reading(std::string_view m) {
  static const std::unordered_set<std::string> set = {
      "mov",  "lea",    "movzx", "movsx", "movsxd", "movabs", "pop",
      "movq", "movd",   "movss", "movsd", "movaps", "movapd", "movups",
      "movdqa", "movdqu", "seta", "setae", "setb", "setbe", "setc", "sete",
      "setg", "setge",  "setl",  "setle", "setna", "setnb", "setne", "setnz",
      "setns", "sets",  "setz",  "seto",  "setno", "setp",  "setnp"};
  return set.count(std::string(m)) != 0;
}

/// Mnemonics that write none of their explicit operands.
inline bool writes_nothing(std::string_view m) {
  static const std::unordered_set<std::string> set = {
      "cmp", "test", "push", "call", "ret", "retn", "nop", "hlt", "leave",
      "int", "int3", "ud2", "comiss", "comisd", "ucomiss", "ucomisd"};
  if (set.count(std::string(m)) != 0) return true;
  // jumps: jmp and all conditional j<cc>
  return !m.empty() && m[0] == 'j';
}

/// Mnemonics where every explicit operand is both read and written.
inline bool all_operands_read_write(std::string_view m) {
  return m == "xchg" || m == "xadd";
}

inline bool looks_like_address_prefix(std::string_view token) {
  if (token.empty()) return false;
  if (token.back() == ':') return true;  // "0x401000:" or "label:"
  auto colon = token.rfind(':');
  if (colon == std::string_view::npos) return false;
  std::string_view tail = token.substr(colon + 1);  // IDA style ".text:0000000000401000"
  if (tail.empty()) return false;
  for (char c : tail) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::string strip_comment(std::string_view line) {
  auto pos = line.find_first_of(";#");
  return std::string(pos == std::string_view::npos ? line : line.substr(0, pos));
}

/// Split an operand list at commas that are not nested inside brackets/parens.
inline std::vector<std::string> split_operands(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && (s[i] == '[' || s[i] == '(')) ++depth;
    if (i < s.size() && (s[i] == ']' || s[i] == ')')) --depth;
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      std::string piece = trim(s.substr(start, i - start));
      if (!piece.empty()) out.push_back(std::move(piece));
      start = i + 1;
    }
  }
  return out;
}

inline Operand classify_operand(std::string text) {
  Operand op;
  op.text = std::move(text);
  if (op.text.find('[') != std::string::npos) {
    op.kind = OperandKind::Memory;
    // first register name inside the brackets is the base
    auto lb = op.text.find('[');
    auto rb = op.text.rfind(']');
    std::string inside = op.text.substr(lb + 1, rb == std::string::npos ? std::string::npos : rb - lb - 1);
    std::string token;
    for (std::size_t i = 0; i <= inside.size(); ++i) {
      if (i < inside.size() && is_ident_char(inside[i])) {
        token.push_back(inside[i]);
        continue;
      }
      if (!token.empty() && is_register_name(token)) {
        op.base_register = canonical_register(token);
        break;
      }
      token.clear();
    }
    return op;
  }
  if (is_digit(op.text[0]) || op.text[0] == '-') {
    op.kind = OperandKind::Immediate;
    return op;
  }
  if (is_register_name(op.text)) {
    op.kind = OperandKind::Register;
    return op;
  }
  op.kind = OperandKind::Label;
  return op;
}

}  // namespace detail

/// Parse one function's textual disassembly listing (Intel syntax, one
/// instruction per line). Address prefixes and ';'/'#' comments are stripped;
/// pure label lines are skipped.
inline AsmFunction parse_disassembly(std::string_view text, std::string id = {}) {
  AsmFunction fn;
  fn.id = std::move(id);
  fn.raw_asm = std::string(text);
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::string body = trim(detail::strip_comment(lines[li]));
    if (body.empty()) continue;
    // strip leading address / label token
    auto ws = body.find_first_of(" \t");
    std::string first = body.substr(0, ws);
    if (detail::looks_like_address_prefix(first)) {
      body = ws == std::string::npos ? std::string() : trim(body.substr(ws));
      if (body.empty()) continue;
      ws = body.find_first_of(" \t");
    }
    if (body[0] == ',') throw MalformedLine(li);
    Instruction ins;
    ins.index = fn.instructions.size();
    ins.mnemonic = lowercase(body.substr(0, ws));
    if (auto comma = ins.mnemonic.find(','); comma != std::string::npos) {
      ins.mnemonic.resize(comma);
      if (ins.mnemonic.empty()) throw MalformedLine(li);
    }
    std::string rest = ws == std::string::npos ? std::string() : std::string(body.substr(ws + 1));
    const bool no_write = detail::writes_nothing(ins.mnemonic);
    const bool all_rw = detail::all_operands_read_write(ins.mnemonic);
    auto pieces = detail::split_operands(rest);
    for (std::size_t oi = 0; oi < pieces.size(); ++oi) {
      Operand op = detail::classify_operand(std::move(pieces[oi]));
      op.written = !no_write && (oi == 0 || all_rw);
      ins.operands.push_back(std::move(op));
    }
    fn.instructions.push_back(std::move(ins));
  }
  if (fn.instructions.empty()) throw EmptyListing();
  return fn;
}

/// Render an instruction back to listing form; parse(render(parse(x)))
/// reproduces the instruction list.
inline std::string render_instruction(const Instruction& ins) {
  std::string out = ins.mnemonic;
  for (std::size_t i = 0; i < ins.operands.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += ins.operands[i].text;
  }
  return out;
}

inline std::string render_listing(const AsmFunction& fn) {
  std::string out;
  for (const auto& ins : fn.instructions) {
    out += render_instruction(ins);
    out += '\n';
  }
  return out;
}

}  // namespace binprobe

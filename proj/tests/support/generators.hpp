#pragma once

// Seeded random inputs for property tests: short adversarial strings (small
// alphabets force n-gram collisions), identifier-like names, and syntactic
// x86-64 listings.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline std::string rand_string(Rng& rng, std::size_t max_len,
                               std::string_view alphabet = "abc d") {
  std::size_t len = pick(rng, max_len + 1);
  std::string s;
  s.reserve(len);
  for (std::size_t i = 0; i < len; ++i) s += alphabet[pick(rng, alphabet.size())];
  return s;
}

inline std::string rand_name(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "get", "set",  "parse", "http",  "buf",  "init", "free", "Read", "Write",
      "str", "node", "tmp",   "URL",   "2",    "64",   "ctx",  "len",  "Map"};
  std::size_t n = 1 + pick(rng, 4);
  std::string name;
  for (std::size_t i = 0; i < n; ++i) {
    if (i && pick(rng, 2) == 0) name += '_';
    name += pieces[i == 0 ? pick(rng, 13) : pick(rng, pieces.size())];  // lead with a letter
  }
  return name;
}

inline std::string rand_listing(Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> regs = {"rax", "rbx", "rcx", "rdx", "rsi",
                                                "rdi", "rbp", "rsp", "r8",  "r9"};
  static const std::vector<std::string> two_op = {"mov", "add", "sub", "xor",  "and",
                                                  "or",  "cmp", "test", "lea", "imul",
                                                  "xchg"};
  static const std::vector<std::string> one_op = {"push", "pop", "inc", "dec", "neg",
                                                  "not",  "call", "jmp"};
  auto operand = [&]() -> std::string {
    switch (pick(rng, 4)) {
      case 0: return regs[pick(rng, regs.size())];
      case 1: return std::to_string(pick(rng, 256));
      case 2: return "[" + regs[pick(rng, regs.size())] + (pick(rng, 2) ? "+8" : "-16") + "]";
      default: return "loc_" + std::to_string(pick(rng, 64));
    }
  };
  std::size_t len = 1 + pick(rng, max_len);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    switch (pick(rng, 8)) {
      case 0:
        out += one_op[pick(rng, one_op.size())] + " " + operand();
        break;
      case 1:
        out += "ret";
        break;
      default:
        out += two_op[pick(rng, two_op.size())] + " " + operand() + ", " + operand();
        break;
    }
    out += '\n';
  }
  return out;
}

}  // namespace gen

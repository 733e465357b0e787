#include <catch2/catch_amalgamated.hpp>

#include "binprobe/asm_parser.hpp"
#include "binprobe/depgraph.hpp"
#include "binprobe/hash.hpp"
#include "binprobe/signature.hpp"
#include "binprobe/strutil.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace binprobe;

TEST_CASE("parse_disassembly classifies operands") {
  AsmFunction fn = parse_disassembly("mov rax, [rbp-8]");
  REQUIRE(fn.instructions.size() == 1);
  const Instruction& ins = fn.instructions[0];
  CHECK(ins.mnemonic == "mov");
  REQUIRE(ins.operands.size() == 2);
  CHECK(ins.operands[0].kind == OperandKind::Register);
  CHECK(ins.operands[0].text == "rax");
  CHECK(ins.operands[0].written);
  CHECK(ins.operands[1].kind == OperandKind::Memory);
  CHECK(ins.operands[1].base_register == "rbp");
  CHECK_FALSE(ins.operands[1].written);
}

TEST_CASE("parse_disassembly strips addresses and comments") {
  AsmFunction fn = parse_disassembly("0x401000: ret ; end");
  REQUIRE(fn.instructions.size() == 1);
  CHECK(fn.instructions[0].mnemonic == "ret");
  CHECK(fn.instructions[0].operands.empty());
}

TEST_CASE("parse_disassembly rejects empty listings") {
  CHECK_THROWS_AS(parse_disassembly(""), EmptyListing);
  CHECK_THROWS_AS(parse_disassembly("; just a comment\n\n  \n"), EmptyListing);
}

TEST_CASE("parse_disassembly flags mnemonic-less residue") {
  CHECK_THROWS_AS(parse_disassembly("mov rax, 1\n, rbx"), MalformedLine);
  try {
    parse_disassembly("mov rax, 1\n, rbx");
  } catch (const MalformedLine& e) {
    CHECK(e.index == 1);
  }
}

TEST_CASE("parse_disassembly handles immediates, labels, IDA prefixes") {
  AsmFunction fn = parse_disassembly(
      ".text:0000000000401000 mov eax, 0x10\n"
      "call strlen\n"
      "jne loc_40\n"
      "add rsp, -8");
  REQUIRE(fn.instructions.size() == 4);
  CHECK(fn.instructions[0].operands[1].kind == OperandKind::Immediate);
  CHECK(fn.instructions[1].operands[0].kind == OperandKind::Label);
  CHECK(fn.instructions[2].operands[0].kind == OperandKind::Label);
  CHECK(fn.instructions[3].operands[1].kind == OperandKind::Immediate);
  // push/call/cmp-style mnemonics never write their operands
  CHECK_FALSE(fn.instructions[1].operands[0].written);
  for (std::size_t i = 0; i < 4; ++i) CHECK(fn.instructions[i].index == i);
}

TEST_CASE("parse round-trips through render_listing") {
  gen::Rng rng(41);
  for (int iter = 0; iter < 100; ++iter) {
    AsmFunction fn = parse_disassembly(gen::rand_listing(rng, 30));
    AsmFunction again = parse_disassembly(render_listing(fn));
    REQUIRE(again.instructions.size() == fn.instructions.size());
    for (std::size_t i = 0; i < fn.instructions.size(); ++i) {
      const auto& a = fn.instructions[i];
      const auto& b = again.instructions[i];
      CHECK(a.mnemonic == b.mnemonic);
      REQUIRE(a.operands.size() == b.operands.size());
      for (std::size_t j = 0; j < a.operands.size(); ++j) {
        CHECK(a.operands[j].text == b.operands[j].text);
        CHECK(a.operands[j].kind == b.operands[j].kind);
        CHECK(a.operands[j].written == b.operands[j].written);
      }
    }
  }
}

TEST_CASE("dependency graph matches the worked examples") {
  SECTION("chain through rax, cut by the intermediate write") {
    auto g = build_dependency_graph(
        parse_disassembly("mov rax, [rbp-8]\nadd rax, 1\nmov [rbp-16], rax"));
    std::vector<DepEdge> want = {{0, 1, "rax"}, {1, 2, "rax"}};
    CHECK(g.edges == want);
  }
  SECTION("single instruction has no pairs") {
    auto g = build_dependency_graph(parse_disassembly("mov rax, 1"));
    CHECK(g.edges.empty());
    CHECK(g.node_count == 1);
  }
  SECTION("redefinition kills the earlier def") {
    auto g = build_dependency_graph(parse_disassembly("mov rax, 1\nmov rax, 2\ninc rax"));
    std::vector<DepEdge> want = {{1, 2, "rax"}};
    CHECK(g.edges == want);
  }
}

TEST_CASE("dependency graph sees sub-register aliases and memory bases") {
  auto g = build_dependency_graph(parse_disassembly("mov eax, 1\nmov rbx, [rax+8]"));
  std::vector<DepEdge> want = {{0, 1, "rax"}};
  CHECK(g.edges == want);
}

TEST_CASE("dependency graph agrees with the quadratic oracle") {
  gen::Rng rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    AsmFunction fn = parse_disassembly(gen::rand_listing(rng, 50));
    auto got = build_dependency_graph(fn);
    auto want = oracle::dep_edges(fn);
    REQUIRE(got.edges == want);
    CHECK(got.node_count == fn.instructions.size());
    for (const auto& e : got.edges) {
      CHECK(e.src < e.dst);
      CHECK(e.dst < got.node_count);
    }
  }
}

TEST_CASE("serialize_edges is stable and compact") {
  auto g = build_dependency_graph(parse_disassembly("mov rax, 1\nadd rbx, rax"));
  CHECK(serialize_edges(g) == "0->1:rax");
  CHECK(serialize_edges(DependencyGraph{}) == "");
}

TEST_CASE("extract_signature on the worked examples") {
  auto [sig1, name1] = extract_signature("static int foo(char *s) { return 0; }");
  CHECK(sig1 == "static int foo(char *s)");
  CHECK(name1 == "foo");

  auto [sig2, name2] = extract_signature("int main(void){}");
  CHECK(sig2 == "int main(void)");
  CHECK(name2 == "main");

  auto [sig3, name3] = extract_signature("/* hi */\nvoid bar (int a,\n int b)\n{");
  CHECK(sig3 == "void bar (int a, int b)");
  CHECK(name3 == "bar");
}

TEST_CASE("extract_signature failure modes") {
  CHECK_THROWS_AS(extract_signature(""), NoSignature);
  CHECK_THROWS_AS(extract_signature("int x = 3;"), NoSignature);
  CHECK_THROWS_AS(extract_signature("{ int y; }"), NoSignature);
}

TEST_CASE("extract_signature treats preprocessor lines as comments") {
  auto [sig, name] = extract_signature("#include <stdio.h>\n#define N 4\nlong f(void) {\n}");
  CHECK(sig == "long f(void)");
  CHECK(name == "f");
}

TEST_CASE("extracted names contain no parens or whitespace") {
  gen::Rng rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    std::string name = gen::rand_name(rng);
    std::string src = "static unsigned " + name + " (int a, char *b)\n{ return 0; }";
    auto [sig, got] = extract_signature(src);
    CHECK(got == name);
    CHECK(got.find('(') == std::string::npos);
    CHECK(got.find(')') == std::string::npos);
    CHECK(got.find(' ') == std::string::npos);
    CHECK(sig.find(name) != std::string::npos);
  }
}

TEST_CASE("normalize_signature folds case, spacing, parameter names") {
  CHECK(normalize_signature("int  Foo( char * buf , size_t n )") ==
        normalize_signature("int foo(char *buf, size_t n)"));
  // parameter names drop, types stay
  CHECK(normalize_signature("int foo(char *buf)") == normalize_signature("int foo(char *s)"));
  CHECK(normalize_signature("int foo(int a)") != normalize_signature("int foo(char a)"));
}

TEST_CASE("strutil basics") {
  CHECK(trim("  a b \t") == "a b");
  CHECK(collapse_whitespace(" a\n\tb  c ") == "a b c");
  CHECK(lowercase("AbC") == "abc");
  CHECK(split_lines("a\nb\r\nc") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_trimmed("a, b ,c", ',') == std::vector<std::string>{"a", "b", "c"});
  CHECK(is_identifier("a_b9"));
  CHECK_FALSE(is_identifier("9ab"));
  CHECK_FALSE(is_identifier("a-b"));
  CHECK_FALSE(is_identifier(""));
  CHECK(replace_first("x {a} y {a}", "{a}", "Z") == "x Z y {a}");
}

TEST_CASE("sha256_hex matches known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hash_to_unit is deterministic and in range") {
  gen::Rng rng(3);
  for (int iter = 0; iter < 500; ++iter) {
    std::string key = gen::rand_name(rng);
    double u = hash_to_unit(42, key);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == hash_to_unit(42, key));
  }
  CHECK(hash_to_unit(1, "x") != hash_to_unit(2, "x"));
}

#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "binprobe/asm_parser.hpp"

namespace binprobe {

struct DepEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::string reg;

  friend bool operator==(const DepEdge&, const DepEdge&) = default;
  friend auto operator<=>(const DepEdge& a, const DepEdge& b) {
    return std::tie(a.src, a.dst, a.reg) <=> std::tie(b.src, b.dst, b.reg);
  }
};

/// Register def-use edges over instruction indices, src < dst, sorted and
/// deduplicated. Memory cells and flag registers are not modeled.
struct DependencyGraph {
  std::size_t node_count = 0;
  std::vector<DepEdge> edges;
};

/// Canonical registers written by an instruction's explicit operands.
inline std::set<std::string> instruction_register_writes(const Instruction& ins) {
  std::set<std::string> out;
  for (const auto& op : ins.operands) {
    if (op.kind == OperandKind::Register && op.written) {
      out.insert(detail::canonical_register(op.text));
    }
  }
  return out;
}

/// Canonical registers read by an instruction: register operands (except a
/// write-only destination) plus every register appearing inside a memory
/// operand's address expression.
inline std::set<std::string> instruction_register_reads(const Instruction& ins) {
  const bool dst_write_only = detail::writes_without_reading(ins.mnemonic);
  std::set<std::string> out;
  for (const auto& op : ins.operands) {
    if (op.kind == OperandKind::Register) {
      if (op.written && dst_write_only) continue;
      out.insert(detail::canonical_register(op.text));
    } else if (op.kind == OperandKind::Memory) {
      std::string token;
      for (std::size_t i = 0; i <= op.text.size(); ++i) {
        if (i < op.text.size() && is_ident_char(op.text[i])) {
          token.push_back(op.text[i]);
          continue;
        }
        if (!token.empty() && detail::is_register_name(token)) {
          out.insert(detail::canonical_register(token));
        }
        token.clear();
      }
    }
  }
  return out;
}

/// Last-writer def-use: edge (i, j, r) iff i writes r, j > i reads r, and no
/// instruction strictly between them writes r.
inline DependencyGraph build_dependency_graph(const AsmFunction& fn) {
  DependencyGraph graph;
  graph.node_count = fn.instructions.size();
  std::unordered_map<std::string, std::size_t> last_writer;
  for (const auto& ins : fn.instructions) {
    for (const auto& reg : instruction_register_reads(ins)) {
      auto it = last_writer.find(reg);
      if (it != last_writer.end()) {
        graph.edges.push_back({it->second, ins.index, reg});
      }
    }
    for (const auto& reg : instruction_register_writes(ins)) {
      last_writer[reg] = ins.index;
    }
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
  return graph;
}

/// Compact serialization of the edge set for endpoint conditioning payloads.
inline std::string serialize_edges(const DependencyGraph& graph) {
  std::string out;
  for (const auto& e : graph.edges) {
    if (!out.empty()) out += ' ';
    out += std::to_string(e.src) + "->" + std::to_string(e.dst) + ":" + e.reg;
  }
  return out;
}

}  // namespace binprobe

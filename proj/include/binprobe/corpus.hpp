#pragma once

#include <fstream>
#include <istream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "binprobe/errors.hpp"
#include "binprobe/hash.hpp"
#include "binprobe/signature.hpp"
#include "binprobe/strutil.hpp"

namespace binprobe {

struct PairRecord {
  std::string id;
  std::string project;
  std::string name;      // ground-truth source function name
  std::string asm_text;  // disassembly
  std::string dec;       // decompiled C
  std::string src;       // original source
};

struct SplitCorpus {
  std::vector<PairRecord> train;
  std::vector<PairRecord> valid;
  std::vector<PairRecord> test;
};

struct IngestStats {
  std::size_t read = 0;
  std::size_t deduplicated = 0;  // records dropped as duplicate src
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

struct IngestConfig {
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  double valid_fraction = 0.05;  // of the non-test remainder
  bool verify_names = true;
};

struct IngestResult {
  SplitCorpus corpus;
  IngestStats stats;
};

namespace detail {

inline PairRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
  if (!j.is_object()) throw SchemaError(line_no, "not a JSON object");
  PairRecord rec;
  auto field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw SchemaError(line_no, std::string("missing or non-string field '") + key + "'");
    return it->get<std::string>();
  };
  rec.id = field("id");
  rec.project = field("project");
  rec.name = field("name");
  rec.asm_text = field("asm");
  rec.dec = field("dec");
  rec.src = field("src");
  if (rec.id.empty()) throw SchemaError(line_no, "empty id");
  if (trim(rec.src).empty()) throw SchemaError(line_no, "empty src");
  return rec;
}

}  // namespace detail

inline nlohmann::json record_to_json(const PairRecord& rec) {
  return nlohmann::json{{"id", rec.id},   {"project", rec.project}, {"name", rec.name},
                        {"asm", rec.asm_text}, {"dec", rec.dec},    {"src", rec.src}};
}

/// Parse a JSONL stream of raw pairs. Malformed lines are fatal and carry
/// their 1-based line number. Blank lines are permitted.
inline std::vector<PairRecord> parse_pair_records(std::istream& in, bool verify_names = true) {
  std::vector<PairRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(line_no, e.what());
    }
    PairRecord rec = detail::record_from_json(j, line_no);
    if (verify_names) {
      std::string extracted;
      try {
        extracted = extract_signature(rec.src).second;
      } catch (const NoSignature& e) {
        throw SchemaError(line_no, std::string("src has no signature: ") + e.what());
      }
      if (extracted != rec.name)
        throw SchemaError(line_no, "name field '" + rec.name + "' does not match src function '" +
                                       extracted + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

/// Drop records whose whitespace-normalized src was already seen (first one
/// wins); surviving ids must be unique.
inline std::vector<PairRecord> deduplicate_by_src(std::vector<PairRecord> records,
                                                  std::size_t* dropped = nullptr) {
  std::vector<PairRecord> out;
  std::unordered_set<std::string> seen_src, seen_id;
  out.reserve(records.size());
  for (auto& rec : records) {
    if (!seen_src.insert(collapse_whitespace(rec.src)).second) continue;
    if (!seen_id.insert(rec.id).second) throw DuplicateId(rec.id);
    out.push_back(std::move(rec));
  }
  if (dropped) *dropped = records.size() - out.size();
  return out;
}

/// Stable machine-independent assignment: each id hashes once for the test
/// decision and once (different stream) for the validation decision, so the
/// split never depends on corpus order or platform.
inline SplitCorpus split_corpus(std::vector<PairRecord> records, const IngestConfig& cfg) {
  SplitCorpus corpus;
  for (auto& rec : records) {
    double u = hash_to_unit(cfg.seed, rec.id);
    if (u < cfg.test_fraction) {
      corpus.test.push_back(std::move(rec));
      continue;
    }
    double v = hash_to_unit(cfg.seed + 1, rec.id);
    if (v < cfg.valid_fraction)
      corpus.valid.push_back(std::move(rec));
    else
      corpus.train.push_back(std::move(rec));
  }
  return corpus;
}

inline IngestResult ingest(std::istream& in, const IngestConfig& cfg = {}) {
  std::vector<PairRecord> records = parse_pair_records(in, cfg.verify_names);
  IngestStats stats;
  stats.read = records.size();
  records = deduplicate_by_src(std::move(records), &stats.deduplicated);
  if (records.empty()) throw EmptyCorpus("no records survived parsing and deduplication");
  IngestResult result;
  result.corpus = split_corpus(std::move(records), cfg);
  stats.train = result.corpus.train.size();
  stats.valid = result.corpus.valid.size();
  stats.test = result.corpus.test.size();
  result.stats = stats;
  return result;
}

inline IngestResult ingest_file(const std::string& path, const IngestConfig& cfg = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return ingest(in, cfg);
}

inline void write_jsonl(const std::vector<PairRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
}

}  // namespace binprobe

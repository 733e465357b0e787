#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace binprobe {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- disassembly / source parsing ---

struct EmptyListing : Error {
  EmptyListing() : Error("no instruction lines survive stripping") {}
};

struct MalformedLine : Error {
  explicit MalformedLine(std::size_t line_index)
      : Error("malformed instruction line at index " + std::to_string(line_index)),
        index(line_index) {}
  std::size_t index;
};

struct NoSignature : Error {
  NoSignature() : Error("no function signature found before first '{'") {}
};

// --- embedding / numeric ---

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct EmptyBatch : Error {
  EmptyBatch() : Error("contrastive batch is empty") {}
  explicit EmptyBatch(const std::string& what) : Error(what) {}
};

struct InsufficientData : Error {
  explicit InsufficientData(const std::string& what) : Error(what) {}
};

struct ZeroProbabilityToken : Error {
  explicit ZeroProbabilityToken(std::size_t position)
      : Error("target token at position " + std::to_string(position) +
              " was assigned probability 0"),
        position(position) {}
  std::size_t position;
};

// --- retrieval ---

struct DuplicateId : Error {
  explicit DuplicateId(const std::string& id) : Error("duplicate id: " + id) {}
};

struct UnknownGoldId : Error {
  explicit UnknownGoldId(const std::string& id) : Error("gold id not in index: " + id) {}
};

// --- sampling ---

struct InvalidDistribution : Error {
  explicit InvalidDistribution(const std::string& what) : Error(what) {}
};

struct InvalidP : Error {
  explicit InvalidP(double p) : Error("top-p must be in (0,1], got " + std::to_string(p)) {}
};

// --- endpoints / probing ---

struct EndpointError : Error {
  EndpointError(const std::string& what, int attempts)
      : Error(what + " (attempts=" + std::to_string(attempts) + ")"), attempts(attempts) {}
  int attempts;
};

struct AllCandidatesMalformed : Error {
  AllCandidatesMalformed() : Error("no generated candidate yielded a parseable signature") {}
  explicit AllCandidatesMalformed(const std::string& what) : Error(what) {}
};

// --- prompting / response parsing ---

struct EmptyInput : Error {
  explicit EmptyInput(const std::string& what) : Error(what) {}
};

struct CacheCorruption : Error {
  explicit CacheCorruption(const std::string& what) : Error(what) {}
};

struct MissingMarker : Error {
  explicit MissingMarker(const std::string& marker) : Error("marker not found: " + marker) {}
};

struct InvalidName : Error {
  explicit InvalidName(const std::string& text)
      : Error("recovered name is not a valid identifier: " + text) {}
};

struct UnparseableVerdict : Error {
  UnparseableVerdict() : Error("no standalone integer in 1..5 found in judge response") {}
  explicit UnparseableVerdict(const std::string& excerpt)
      : Error("no standalone integer in 1..5 found in judge response: " + excerpt) {}
};

// --- statistics ---

struct LengthMismatch : Error {
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("score lists differ in length: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

struct DegenerateInput : Error {
  explicit DegenerateInput(const std::string& what) : Error(what) {}
};

// --- corpus / pipeline ---

struct SchemaError : Error {
  SchemaError(std::size_t line, const std::string& what)
      : Error("schema error at line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct EmptyCorpus : Error {
  EmptyCorpus() : Error("corpus is empty after ingestion") {}
  explicit EmptyCorpus(const std::string& what) : Error(what) {}
};

struct ComponentMissing : Error {
  explicit ComponentMissing(const std::string& what) : Error("missing component: " + what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace binprobe

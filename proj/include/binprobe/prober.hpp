#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "binprobe/encoder.hpp"
#include "binprobe/errors.hpp"
#include "binprobe/gen_endpoint.hpp"
#include "binprobe/signature.hpp"
#include "binprobe/wire.hpp"

namespace binprobe {

struct ProbeItem {
  std::string signature;
  std::string body;
  double score = 0.0;  // cosine(binary embedding, signature embedding)
};

struct ProbeSet {
  std::vector<ProbeItem> items;  // scores non-increasing, signatures distinct
  std::size_t k = 0;
};

/// The binary-signature dual encoder used to rank candidates. Either a
/// signature-trained pair (default) or the alignment pair can be plugged in.
struct ProbeFilter {
  LinearEncoder binary_encoder;
  LinearEncoder text_encoder;
};

struct ProbeConfig {
  std::size_t signature_samples = 20;  // M
  std::size_t k = 5;
  double top_p_signature = 0.75;
  double top_p_body = 0.5;
  int max_tokens_signature = 64;
  int max_tokens_body = 512;
  std::uint64_t base_seed = 0;
  std::size_t parallelism = 4;
  RetryPolicy retry;
};

namespace detail {

/// Runs jobs[0..n) on up to `parallelism` threads; results land by job index,
/// so output order never depends on scheduling. First exception wins.
template <typename Job>
void run_indexed(std::size_t n, std::size_t parallelism, Job&& job) {
  if (n == 0) return;
  std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

/// Two-stage knowledge probing: sample M signatures at high randomness, parse
/// and dedupe them, rank by dual-encoder cosine against the binary, then
/// complete the top-k survivors at lower randomness.
inline ProbeSet probe(const BinaryConditioning& binary, GenerationEndpoint& endpoint,
                      const ProbeFilter& filter, const ProbeConfig& cfg) {
  if (cfg.signature_samples == 0) throw ConfigError("signature_samples must be positive");
  if (cfg.k == 0) throw ConfigError("k must be positive");

  std::vector<GenerationResponse> raw(cfg.signature_samples);
  detail::run_indexed(cfg.signature_samples, cfg.parallelism, [&](std::size_t i) {
    GenerationRequest req;
    req.conditioning = binary;
    req.mode = GenerationMode::Signature;
    req.top_p = cfg.top_p_signature;
    req.max_tokens = cfg.max_tokens_signature;
    req.seed = cfg.base_seed + i;
    raw[i] = with_retries(cfg.retry, [&] { return endpoint.generate(req); });
  });

  struct Candidate {
    std::string signature;
    double score;
  };
  std::vector<Candidate> candidates;
  std::unordered_set<std::string> seen;
  EmbeddingVector binary_emb = filter.binary_encoder.encode(binary.as_text());
  for (const auto& resp : raw) {
    std::string sig_text;
    try {
      sig_text = extract_signature(resp.text).first;
    } catch (const NoSignature&) {
      continue;
    }
    if (!seen.insert(normalize_signature(sig_text)).second) continue;
    double score = cosine_similarity(binary_emb, filter.text_encoder.encode(sig_text));
    candidates.push_back({sig_text, score});
  }
  if (candidates.empty())
    throw AllCandidatesMalformed("none of " + std::to_string(cfg.signature_samples) +
                                 " sampled signatures parsed");

  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.signature < b.signature;
  });
  if (candidates.size() > cfg.k) candidates.resize(cfg.k);

  ProbeSet out;
  out.k = cfg.k;
  out.items.resize(candidates.size());
  detail::run_indexed(candidates.size(), cfg.parallelism, [&](std::size_t i) {
    GenerationRequest req;
    req.conditioning = binary;
    req.mode = GenerationMode::Completion;
    req.prefix = candidates[i].signature;
    req.top_p = cfg.top_p_body;
    req.max_tokens = cfg.max_tokens_body;
    req.seed = cfg.base_seed + cfg.signature_samples + i;
    GenerationResponse resp = with_retries(cfg.retry, [&] { return endpoint.generate(req); });
    out.items[i] = {candidates[i].signature, resp.text, candidates[i].score};
  });
  return out;
}

/// Context fragments in rank order, as consumed by the augmented prompts.
inline std::vector<std::string> probe_contexts(const ProbeSet& set) {
  std::vector<std::string> contexts;
  contexts.reserve(set.items.size());
  for (const auto& item : set.items) {
    std::string fragment = item.signature;
    if (!item.body.empty()) {
      if (!fragment.empty() && fragment.back() != '\n' && item.body.front() != '\n' &&
          item.body.front() != ' ')
        fragment.push_back(' ');
    }
    fragment += item.body;
    contexts.push_back(std::move(fragment));
  }
  return contexts;
}

}  // namespace binprobe

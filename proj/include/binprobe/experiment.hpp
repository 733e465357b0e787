#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "binprobe/corpus.hpp"
#include "binprobe/errors.hpp"
#include "binprobe/judge.hpp"
#include "binprobe/metrics.hpp"
#include "binprobe/prober.hpp"
#include "binprobe/prompts.hpp"
#include "binprobe/recoverer.hpp"
#include "binprobe/report.hpp"
#include "binprobe/vector_index.hpp"

namespace binprobe {

enum class Setup { DecOnly, Retrieval, Prorec };

inline std::string setup_name(Setup s) {
  switch (s) {
    case Setup::DecOnly: return "dec_only";
    case Setup::Retrieval: return "retrieval";
    case Setup::Prorec: return "prorec";
  }
  return "?";
}

struct ExperimentConfig {
  Task task = Task::NameRecovery;
  Setup setup = Setup::DecOnly;
  std::size_t k = 5;
  bool no_analysis = false;  // augmented prompts omit the analysis instruction
  RecovererConfig recoverer;
  ProbeConfig probe;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  double requests_per_second = 0.0;  // 0 = unpaced
};

struct ExperimentComponents {
  ChatEndpoint* recoverer = nullptr;                              // always required
  ResponseCache* cache = nullptr;                                 // optional
  const VectorIndex* index = nullptr;                             // retrieval setup
  const LinearEncoder* query_encoder = nullptr;                   // retrieval setup
  GenerationEndpoint* prober = nullptr;                           // prorec setup
  const ProbeFilter* filter = nullptr;                            // prorec setup
  const std::map<std::string, std::string>* references = nullptr;  // summarization tasks
};

struct ExampleArtifact {
  std::string id;
  std::vector<std::string> contexts;
  RenderedPrompt prompt;
  std::string raw_response;
  std::string answer;
  std::optional<std::string> failure;
};

struct ExperimentRun {
  MetricReport report;
  std::vector<ExampleArtifact> artifacts;  // sorted by id, parallel to report rows
};

namespace detail {

class RateLimitedChatEndpoint : public ChatEndpoint {
 public:
  RateLimitedChatEndpoint(ChatEndpoint& inner, RateLimiter& limiter)
      : inner_(inner), limiter_(limiter) {}

  ChatResponse complete(const ChatRequest& req) override {
    limiter_.acquire();
    try {
      ChatResponse resp = inner_.complete(req);
      limiter_.release();
      return resp;
    } catch (...) {
      limiter_.release();
      throw;
    }
  }

  std::string id() const override { return inner_.id(); }

 private:
  ChatEndpoint& inner_;
  RateLimiter& limiter_;
};

inline void require(bool present, const std::string& component) {
  if (!present) throw ComponentMissing(component);
}

inline nlohmann::json fingerprint_config(const ExperimentConfig& cfg) {
  return nlohmann::json{{"task", static_cast<int>(cfg.task)},
                        {"setup", setup_name(cfg.setup)},
                        {"k", cfg.k},
                        {"no_analysis", cfg.no_analysis},
                        {"model", cfg.recoverer.model},
                        {"temperature", cfg.recoverer.temperature},
                        {"summary_only", cfg.recoverer.summary_only},
                        {"seed", cfg.seed},
                        {"chrf", {{"max_n", 6}, {"beta", 2.0}}},
                        {"char_bleu", {{"max_n", 4}, {"smoothing", "add-one-on-zero"}}},
                        {"symlm", "token-sets"}};
}

}  // namespace detail

/// Run one setup over the given test examples. Per-example failures are
/// recorded, never fatal; output order is by example id regardless of worker
/// scheduling, and nothing volatile (timestamps, cache-hit flags) reaches the
/// report, so reruns with a warm cache reproduce it byte for byte.
inline ExperimentRun run_experiment(const ExperimentConfig& cfg,
                                    const std::vector<PairRecord>& examples,
                                    const ExperimentComponents& comps) {
  detail::require(comps.recoverer != nullptr, "recoverer endpoint");
  bool want_contexts = cfg.k > 0;
  if (cfg.setup == Setup::Retrieval && want_contexts) {
    detail::require(comps.index != nullptr, "retrieval index");
    detail::require(comps.query_encoder != nullptr, "binary query encoder");
  }
  if (cfg.setup == Setup::Prorec && want_contexts) {
    detail::require(comps.prober != nullptr, "prober endpoint");
    detail::require(comps.filter != nullptr, "probe filter encoders");
  }
  bool summarization = cfg.task != Task::NameRecovery;
  if (summarization) detail::require(comps.references != nullptr, "reference summaries");

  std::vector<const PairRecord*> ordered;
  ordered.reserve(examples.size());
  for (const auto& rec : examples) ordered.push_back(&rec);
  std::sort(ordered.begin(), ordered.end(),
            [](const PairRecord* a, const PairRecord* b) { return a->id < b->id; });

  RateLimiter limiter(cfg.requests_per_second,
                      cfg.parallelism == 0 ? 1 : cfg.parallelism);
  detail::RateLimitedChatEndpoint paced(*comps.recoverer, limiter);

  std::vector<ExampleArtifact> artifacts(ordered.size());
  std::vector<PerExampleScores> rows(ordered.size());

  detail::run_indexed(ordered.size(), cfg.parallelism == 0 ? 1 : cfg.parallelism,
                      [&](std::size_t i) {
    const PairRecord& rec = *ordered[i];
    ExampleArtifact& art = artifacts[i];
    PerExampleScores& row = rows[i];
    art.id = rec.id;
    row.id = rec.id;
    try {
      if (want_contexts && cfg.setup == Setup::Retrieval) {
        EmbeddingVector q = comps.query_encoder->encode(rec.asm_text);
        for (auto& hit : comps.index->query_topk(q.values, cfg.k))
          art.contexts.push_back(hit.payload);
      } else if (want_contexts && cfg.setup == Setup::Prorec) {
        AsmFunction fn = parse_disassembly(rec.asm_text, rec.id);
        DependencyGraph graph = build_dependency_graph(fn);
        ProbeConfig pc = cfg.probe;
        pc.k = cfg.k;
        ProbeSet set = probe(make_conditioning(fn, graph), *comps.prober, *comps.filter, pc);
        art.contexts = probe_contexts(set);
      }

      PromptSpec spec;
      spec.task = cfg.task;
      spec.variant = art.contexts.empty()
                         ? PromptVariant::Default
                         : (cfg.no_analysis ? PromptVariant::AugmentedNoAnalysis
                                            : PromptVariant::Augmented);
      spec.dec_code = cfg.task == Task::SummarizeSrc ? rec.src : rec.dec;
      spec.contexts = art.contexts;

      RecoveryResult result = recover(spec, cfg.recoverer, paced, comps.cache);
      art.prompt = build_prompt(spec);
      art.raw_response = result.raw;
      art.answer = result.answer;

      if (cfg.task == Task::NameRecovery) {
        Prf prf = symlm_prf(result.answer, rec.name);
        row.values["symlm_precision"] = prf.precision;
        row.values["symlm_recall"] = prf.recall;
        row.values["symlm_f1"] = prf.f1;
        row.values["char_bleu"] = char_bleu(result.answer, rec.name);
        row.values["char_rouge_l"] = char_rouge_l(result.answer, rec.name);
        row.values["char_meteor"] = char_meteor(result.answer, rec.name);
      } else {
        auto it = comps.references->find(rec.id);
        if (it == comps.references->end())
          throw Error("no reference summary for example " + rec.id);
        row.values["chrf"] = chrf(result.answer, it->second);
      }
    } catch (const Error& e) {
      art.failure = e.what();
      row.failure = e.what();
      row.values.clear();
    }
  });

  ExperimentRun run;
  run.report = make_report(std::move(rows), detail::fingerprint_config(cfg));
  run.artifacts = std::move(artifacts);
  return run;
}

/// References for summarization scoring, keyed (example id, model id).
class ReferenceStore {
 public:
  void put(const std::string& id, const std::string& model, std::string summary) {
    store_[model][id] = std::move(summary);
  }

  const std::map<std::string, std::string>* for_model(const std::string& model) const {
    auto it = store_.find(model);
    return it == store_.end() ? nullptr : &it->second;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [model, by_id] : store_) n += by_id.size();
    return n;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    for (const auto& [model, by_id] : store_)
      for (const auto& [id, summary] : by_id)
        out << nlohmann::json{{"id", id}, {"model", model}, {"summary", summary}}.dump() << '\n';
  }

  static ReferenceStore load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    ReferenceStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        store.put(j.at("id").get<std::string>(), j.at("model").get<std::string>(),
                  j.at("summary").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(line_no, e.what());
      }
    }
    return store;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> store_;  // model -> id -> summary
};

/// Summarize each example's source function once per recoverer model; failures
/// are logged per example and skipped, not fatal.
inline ReferenceStore make_reference_summaries(const std::vector<PairRecord>& examples,
                                               const RecovererConfig& cfg, ChatEndpoint& endpoint,
                                               ResponseCache* cache,
                                               std::vector<std::string>* failures = nullptr) {
  std::vector<const PairRecord*> ordered;
  for (const auto& rec : examples) ordered.push_back(&rec);
  std::sort(ordered.begin(), ordered.end(),
            [](const PairRecord* a, const PairRecord* b) { return a->id < b->id; });
  ReferenceStore store;
  for (const PairRecord* rec : ordered) {
    PromptSpec spec;
    spec.task = Task::SummarizeSrc;
    spec.variant = PromptVariant::Default;
    spec.dec_code = rec->src;
    try {
      RecoveryResult result = recover(spec, cfg, endpoint, cache);
      store.put(rec->id, cfg.model, result.answer);
    } catch (const Error& e) {
      if (failures) failures->push_back(rec->id + ": " + e.what());
    }
  }
  return store;
}

struct AblationRow {
  std::string setup;
  std::string variant;  // "analysis" / "no_analysis" / "-" for the baseline
  std::size_t k = 0;
  double mean_f1 = 0.0;
  double variance = 0.0;  // sample variance over repeats
  std::size_t repeats = 0;
};

namespace detail {

inline std::pair<double, double> mean_and_sample_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  if (xs.size() > 1) {
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
  }
  return {mean, var};
}

}  // namespace detail

/// Repeat name-recovery runs across context depths, with and without the
/// analysis instruction, and report mean and sample variance of SymLM F1 per
/// cell. Runs are uncached so a stochastic endpoint can surface variance.
inline std::vector<AblationRow> ablation_topk(const ExperimentConfig& base,
                                              const std::vector<PairRecord>& examples,
                                              const std::vector<std::size_t>& ks,
                                              std::size_t repeats,
                                              ExperimentComponents comps) {
  if (repeats < 2) throw ConfigError("ablation needs at least 2 repeats");
  if (ks.empty()) throw ConfigError("ablation needs at least one k");
  comps.cache = nullptr;  // deliberate: repeats must reach the endpoint

  auto f1_of = [&](const ExperimentConfig& cfg) {
    ExperimentRun run = run_experiment(cfg, examples, comps);
    auto it = run.report.aggregate.find("symlm_f1");
    return it == run.report.aggregate.end() ? 0.0 : it->second;
  };

  std::vector<AblationRow> rows;

  {
    std::vector<double> f1s;
    for (std::size_t r = 0; r < repeats; ++r) {
      ExperimentConfig cfg = base;
      cfg.task = Task::NameRecovery;
      cfg.setup = Setup::DecOnly;
      cfg.k = 0;
      cfg.seed = base.seed + r;
      cfg.probe.base_seed = base.probe.base_seed + r * 1000;
      f1s.push_back(f1_of(cfg));
    }
    auto [mean, var] = detail::mean_and_sample_variance(f1s);
    rows.push_back({"dec_only", "-", 0, mean, var, repeats});
  }

  for (Setup setup : {Setup::Retrieval, Setup::Prorec}) {
    for (bool no_analysis : {false, true}) {
      for (std::size_t k : ks) {
        std::vector<double> f1s;
        for (std::size_t r = 0; r < repeats; ++r) {
          ExperimentConfig cfg = base;
          cfg.task = Task::NameRecovery;
          cfg.setup = setup;
          cfg.k = k;
          cfg.no_analysis = no_analysis;
          cfg.seed = base.seed + r;
          cfg.probe.base_seed = base.probe.base_seed + r * 1000;
          f1s.push_back(f1_of(cfg));
        }
        auto [mean, var] = detail::mean_and_sample_variance(f1s);
        rows.push_back({setup_name(setup), no_analysis ? "no_analysis" : "analysis", k, mean, var,
                        repeats});
      }
    }
  }
  return rows;
}

inline std::string render_ablation(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "setup" << std::setw(13) << "variant" << std::right
      << std::setw(4) << "k" << std::setw(12) << "mean_f1" << std::setw(14) << "variance"
      << '\n';
  out << std::string(53, '-') << '\n';
  for (const auto& row : rows) {
    out << std::left << std::setw(10) << row.setup << std::setw(13) << row.variant << std::right
        << std::setw(4) << row.k << std::setw(12) << detail::format_value(row.mean_f1)
        << std::setw(14) << detail::format_value(row.variance) << '\n';
  }
  return out.str();
}

}  // namespace binprobe

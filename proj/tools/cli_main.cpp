// binprobe command-line pipeline: ingest -> train-dual-encoder -> build-index
// -> probe/recover -> evaluate/ablation -> meta-eval.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binprobe/binprobe.hpp"

namespace fs = std::filesystem;
using namespace binprobe;

namespace {

std::vector<PairRecord> load_records(const std::string& path, bool verify_names = false) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_pair_records(in, verify_names);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
}

Task parse_task(const std::string& name) {
  if (name == "name") return Task::NameRecovery;
  if (name == "summarize-dec") return Task::SummarizeDec;
  if (name == "summarize-src") return Task::SummarizeSrc;
  throw ConfigError("unknown task: " + name + " (expected name|summarize-dec|summarize-src)");
}

Setup parse_setup(const std::string& name) {
  if (name == "dec_only") return Setup::DecOnly;
  if (name == "retrieval") return Setup::Retrieval;
  if (name == "prorec") return Setup::Prorec;
  throw ConfigError("unknown setup: " + name + " (expected dec_only|retrieval|prorec)");
}

// JSON config file for evaluate/ablation; explicit CLI flags override it.
void apply_config_file(const std::string& path, ExperimentConfig& cfg) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
  if (j.contains("task")) cfg.task = parse_task(j.at("task").get<std::string>());
  if (j.contains("setup")) cfg.setup = parse_setup(j.at("setup").get<std::string>());
  if (j.contains("k")) cfg.k = j.at("k").get<std::size_t>();
  if (j.contains("no_analysis")) cfg.no_analysis = j.at("no_analysis").get<bool>();
  if (j.contains("model")) cfg.recoverer.model = j.at("model").get<std::string>();
  if (j.contains("temperature")) cfg.recoverer.temperature = j.at("temperature").get<double>();
  if (j.contains("max_tokens")) cfg.recoverer.max_tokens = j.at("max_tokens").get<int>();
  if (j.contains("summary_only")) cfg.recoverer.summary_only = j.at("summary_only").get<bool>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("parallelism")) cfg.parallelism = j.at("parallelism").get<std::size_t>();
  if (j.contains("requests_per_second"))
    cfg.requests_per_second = j.at("requests_per_second").get<double>();
  if (j.contains("probe")) {
    const auto& p = j.at("probe");
    if (p.contains("signature_samples"))
      cfg.probe.signature_samples = p.at("signature_samples").get<std::size_t>();
    if (p.contains("top_p_signature"))
      cfg.probe.top_p_signature = p.at("top_p_signature").get<double>();
    if (p.contains("top_p_body")) cfg.probe.top_p_body = p.at("top_p_body").get<double>();
    if (p.contains("max_tokens_signature"))
      cfg.probe.max_tokens_signature = p.at("max_tokens_signature").get<int>();
    if (p.contains("max_tokens_body"))
      cfg.probe.max_tokens_body = p.at("max_tokens_body").get<int>();
    if (p.contains("base_seed")) cfg.probe.base_seed = p.at("base_seed").get<std::uint64_t>();
    if (p.contains("parallelism"))
      cfg.probe.parallelism = p.at("parallelism").get<std::size_t>();
  }
}

// Deterministic desk-scale slice: keep the `limit` ids with the smallest
// seeded hash, so the sample is stable across machines and reruns.
std::vector<PairRecord> sample_slice(std::vector<PairRecord> records, std::size_t limit,
                                     std::uint64_t seed) {
  if (limit == 0 || records.size() <= limit) return records;
  std::stable_sort(records.begin(), records.end(), [&](const PairRecord& a, const PairRecord& b) {
    double ua = hash_to_unit(seed + 2, a.id);
    double ub = hash_to_unit(seed + 2, b.id);
    if (ua != ub) return ua < ub;
    return a.id < b.id;
  });
  records.resize(limit);
  return records;
}

// Owns every endpoint/encoder/index the experiment components point into.
struct Wiring {
  std::unique_ptr<ChatEndpoint> chat;
  std::unique_ptr<GenerationEndpoint> gen;
  std::unique_ptr<ResponseCache> cache;
  std::unique_ptr<VectorIndex> index;
  std::unique_ptr<LinearEncoder> query_encoder;
  std::unique_ptr<ProbeFilter> filter;
  ReferenceStore references;
};

struct EndpointFlags {
  std::string chat_fixtures;
  std::string chat_host;
  int chat_port = 0;
  std::string chat_path = "/chat";
  std::string api_key_env;
  std::string cache_dir;
  std::string index_path;
  std::string query_encoder_path;
  std::string gen_fixtures;
  std::string gen_host;
  int gen_port = 0;
  std::string binary_encoder_path;
  std::string text_encoder_path;
  std::string references_path;
};

void add_endpoint_flags(CLI::App* cmd, EndpointFlags& f) {
  cmd->add_option("--chat-fixtures", f.chat_fixtures, "fixture dir for an offline recoverer");
  cmd->add_option("--chat-host", f.chat_host, "recoverer endpoint host");
  cmd->add_option("--chat-port", f.chat_port, "recoverer endpoint port");
  cmd->add_option("--chat-path", f.chat_path, "recoverer endpoint path");
  cmd->add_option("--api-key-env", f.api_key_env,
                  "env var holding the bearer token for the recoverer endpoint");
  cmd->add_option("--cache", f.cache_dir, "response cache directory");
  cmd->add_option("--index", f.index_path, "vector index file (retrieval setup)");
  cmd->add_option("--query-encoder", f.query_encoder_path,
                  "binary-side encoder checkpoint for retrieval queries");
  cmd->add_option("--gen-fixtures", f.gen_fixtures, "fixture dir for an offline prober");
  cmd->add_option("--gen-host", f.gen_host, "prober endpoint host");
  cmd->add_option("--gen-port", f.gen_port, "prober endpoint port");
  cmd->add_option("--binary-encoder", f.binary_encoder_path,
                  "binary-side encoder checkpoint (prorec filter)");
  cmd->add_option("--text-encoder", f.text_encoder_path,
                  "text-side encoder checkpoint (prorec filter)");
  cmd->add_option("--references", f.references_path,
                  "reference summaries JSONL (summarization tasks)");
}

void wire_chat(const EndpointFlags& f, Wiring& w, ExperimentComponents& comps) {
  if (!f.chat_fixtures.empty())
    w.chat = std::make_unique<MockChatEndpoint>(f.chat_fixtures);
  else if (!f.chat_host.empty())
    w.chat = std::make_unique<HttpChatEndpoint>(f.chat_host, f.chat_port, f.chat_path,
                                                f.api_key_env);
  else
    throw ConfigError("no recoverer endpoint: pass --chat-fixtures or --chat-host/--chat-port");
  comps.recoverer = w.chat.get();
  if (!f.cache_dir.empty()) {
    w.cache = std::make_unique<ResponseCache>(f.cache_dir);
    comps.cache = w.cache.get();
  }
}

void wire_retrieval(const EndpointFlags& f, Wiring& w, ExperimentComponents& comps) {
  if (f.index_path.empty() || f.query_encoder_path.empty())
    throw ConfigError("retrieval setup needs --index and --query-encoder");
  w.index = std::make_unique<VectorIndex>(VectorIndex::load(f.index_path));
  w.query_encoder = std::make_unique<LinearEncoder>(load_encoder(f.query_encoder_path));
  comps.index = w.index.get();
  comps.query_encoder = w.query_encoder.get();
}

void wire_prorec(const EndpointFlags& f, Wiring& w, ExperimentComponents& comps) {
  if (!f.gen_fixtures.empty())
    w.gen = std::make_unique<MockGenerationEndpoint>(f.gen_fixtures);
  else if (!f.gen_host.empty())
    w.gen = std::make_unique<HttpGenerationEndpoint>(f.gen_host, f.gen_port);
  else
    throw ConfigError("prorec setup needs --gen-fixtures or --gen-host/--gen-port");
  if (f.binary_encoder_path.empty() || f.text_encoder_path.empty())
    throw ConfigError("prorec setup needs --binary-encoder and --text-encoder");
  w.filter = std::make_unique<ProbeFilter>();
  w.filter->binary_encoder = load_encoder(f.binary_encoder_path);
  w.filter->text_encoder = load_encoder(f.text_encoder_path);
  comps.prober = w.gen.get();
  comps.filter = w.filter.get();
}

void wire_references(const EndpointFlags& f, const std::string& model, Wiring& w,
                     ExperimentComponents& comps) {
  if (f.references_path.empty()) throw ConfigError("summarization tasks need --references");
  w.references = ReferenceStore::load(f.references_path);
  const auto* refs = w.references.for_model(model);
  if (!refs)
    throw ConfigError("no references for model " + model + " in " + f.references_path);
  comps.references = refs;
}

nlohmann::json artifact_to_json(const ExampleArtifact& art) {
  nlohmann::json j{{"id", art.id},
                   {"contexts", art.contexts},
                   {"system", art.prompt.system},
                   {"user", art.prompt.user},
                   {"raw_response", art.raw_response},
                   {"answer", art.answer}};
  if (art.failure) j["failure"] = *art.failure;
  return j;
}

int cmd_ingest(const std::string& input, const std::string& out_dir, const IngestConfig& cfg) {
  IngestResult result = ingest_file(input, cfg);
  fs::create_directories(out_dir);
  write_jsonl(result.corpus.train, (fs::path(out_dir) / "train.jsonl").string());
  write_jsonl(result.corpus.valid, (fs::path(out_dir) / "valid.jsonl").string());
  write_jsonl(result.corpus.test, (fs::path(out_dir) / "test.jsonl").string());
  const IngestStats& s = result.stats;
  std::cout << "read " << s.read << " records, dropped " << s.deduplicated
            << " duplicate src\n"
            << "train " << s.train << " / valid " << s.valid << " / test " << s.test << "\n"
            << "wrote " << out_dir << "/{train,valid,test}.jsonl\n";
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& out_dir,
              const TrainConfig& cfg) {
  std::vector<PairRecord> records = load_records(corpus_path);
  std::vector<AlignedPair> pairs;
  pairs.reserve(records.size());
  for (const auto& rec : records) pairs.push_back({rec.asm_text, rec.src});
  TrainResult result = train_dual_encoder(pairs, cfg);
  fs::create_directories(out_dir);
  save_encoder(result.asm_encoder, (fs::path(out_dir) / "asm_encoder.bin").string());
  save_encoder(result.src_encoder, (fs::path(out_dir) / "src_encoder.bin").string());
  save_loss_trace(result.loss_trace, (fs::path(out_dir) / "loss_trace.csv").string());
  std::cout << "trained on " << pairs.size() << " pairs for " << result.loss_trace.size()
            << " steps\n";
  if (!result.loss_trace.empty())
    std::cout << "final loss " << result.loss_trace.back() << "\n";
  std::cout << "wrote " << out_dir << "/{asm_encoder.bin,src_encoder.bin,loss_trace.csv}\n";
  return 0;
}

int cmd_build_index(const std::string& corpus_path, const std::string& encoder_path,
                    const std::string& out_path) {
  std::vector<PairRecord> records = load_records(corpus_path);
  LinearEncoder encoder = load_encoder(encoder_path);
  std::vector<IndexEntry> entries;
  entries.reserve(records.size());
  for (const auto& rec : records) {
    EmbeddingVector emb = encoder.encode(rec.src);
    entries.push_back({rec.id, emb.values, rec.src});
  }
  VectorIndex index = VectorIndex::build(std::move(entries));
  index.save(out_path);
  std::cout << "indexed " << index.size() << " source functions (dim " << index.dimension()
            << ") -> " << out_path << "\n";
  return 0;
}

int cmd_probe(const std::string& asm_path, const EndpointFlags& f, const ProbeConfig& cfg,
              bool as_json) {
  std::unique_ptr<GenerationEndpoint> endpoint;
  if (!f.gen_fixtures.empty())
    endpoint = std::make_unique<MockGenerationEndpoint>(f.gen_fixtures);
  else if (!f.gen_host.empty())
    endpoint = std::make_unique<HttpGenerationEndpoint>(f.gen_host, f.gen_port);
  else
    throw ConfigError("pass --gen-fixtures or --gen-host/--gen-port");
  if (f.binary_encoder_path.empty() || f.text_encoder_path.empty())
    throw ConfigError("probing needs --binary-encoder and --text-encoder");

  ProbeFilter filter;
  filter.binary_encoder = load_encoder(f.binary_encoder_path);
  filter.text_encoder = load_encoder(f.text_encoder_path);

  AsmFunction fn = parse_disassembly(read_file(asm_path), fs::path(asm_path).stem().string());
  DependencyGraph graph = build_dependency_graph(fn);
  ProbeSet set = probe(make_conditioning(fn, graph), *endpoint, filter, cfg);

  if (as_json) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : set.items)
      items.push_back({{"signature", item.signature}, {"body", item.body},
                       {"score", item.score}});
    std::cout << nlohmann::json{{"k", set.k}, {"items", items}}.dump(2) << "\n";
  } else {
    std::size_t rank = 1;
    for (const auto& item : set.items)
      std::printf("#%zu  score=%.4f\n%s %s\n\n", rank++, item.score, item.signature.c_str(),
                  item.body.c_str());
  }
  return 0;
}

int cmd_recover(const std::string& dec_path, const std::string& task_name,
                const std::vector<std::string>& context_paths, const EndpointFlags& f,
                const RecovererConfig& cfg, bool no_analysis, bool as_json) {
  std::unique_ptr<ChatEndpoint> endpoint;
  if (!f.chat_fixtures.empty())
    endpoint = std::make_unique<MockChatEndpoint>(f.chat_fixtures);
  else if (!f.chat_host.empty())
    endpoint = std::make_unique<HttpChatEndpoint>(f.chat_host, f.chat_port, f.chat_path,
                                                  f.api_key_env);
  else
    throw ConfigError("pass --chat-fixtures or --chat-host/--chat-port");

  std::unique_ptr<ResponseCache> cache;
  if (!f.cache_dir.empty()) cache = std::make_unique<ResponseCache>(f.cache_dir);

  PromptSpec spec;
  spec.task = parse_task(task_name);
  spec.dec_code = read_file(dec_path);
  for (const auto& path : context_paths) spec.contexts.push_back(read_file(path));
  spec.variant = spec.contexts.empty()
                     ? PromptVariant::Default
                     : (no_analysis ? PromptVariant::AugmentedNoAnalysis
                                    : PromptVariant::Augmented);

  RecoveryResult result = recover(spec, cfg, *endpoint, cache.get());
  if (as_json) {
    nlohmann::json j{{"answer", result.answer},
                     {"analysis", result.analysis.value_or("")},
                     {"raw", result.raw},
                     {"endpoint", result.provenance.endpoint_id},
                     {"cache_hit", result.provenance.cache_hit}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << result.answer << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& corpus_path, const std::string& out_dir,
                 const ExperimentConfig& cfg, const EndpointFlags& f, std::size_t limit) {
  std::vector<PairRecord> examples = sample_slice(load_records(corpus_path), limit, cfg.seed);

  ExperimentComponents comps;
  Wiring wiring;
  wire_chat(f, wiring, comps);
  if (cfg.setup == Setup::Retrieval && cfg.k > 0) wire_retrieval(f, wiring, comps);
  if (cfg.setup == Setup::Prorec && cfg.k > 0) wire_prorec(f, wiring, comps);
  if (cfg.task != Task::NameRecovery)
    wire_references(f, cfg.recoverer.model, wiring, comps);

  ExperimentRun run = run_experiment(cfg, examples, comps);

  std::string label = setup_name(cfg.setup) + " / " + cfg.recoverer.model;
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "report.json", report_to_json(run.report).dump(2) + "\n");
  write_file(fs::path(out_dir) / "report.csv", report_to_csv(run.report));
  write_file(fs::path(out_dir) / "table.txt", render_table({{label, run.report}}));
  {
    std::ostringstream log;
    for (const auto& art : run.artifacts) log << artifact_to_json(art).dump() << '\n';
    write_file(fs::path(out_dir) / "artifacts.jsonl", log.str());
  }

  std::cout << render_table({{label, run.report}});
  std::cout << "examples " << run.report.per_example.size() << ", excluded "
            << run.report.excluded << "\n"
            << "wrote " << out_dir << "/{report.json,report.csv,table.txt,artifacts.jsonl}\n";
  bool all_failed =
      !run.report.per_example.empty() && run.report.excluded == run.report.per_example.size();
  return all_failed ? 1 : 0;
}

int cmd_meta_eval(const std::string& report_path, const std::string& human_path,
                  const std::string& out_path) {
  MetricReport report = report_from_json(nlohmann::json::parse(read_file(report_path)));
  std::ifstream human_in(human_path);
  if (!human_in) throw Error("cannot open " + human_path);
  std::vector<HumanScore> human = load_human_scores(human_in);
  std::vector<MetaEvalRow> rows = meta_evaluate(report, human);

  std::ostringstream csv;
  csv << "metric,question,rho,p_value,exact_p,n\n";
  for (const auto& row : rows) {
    csv << row.metric << ',' << row.question << ',' << row.rho << ',' << row.p_value << ',';
    if (row.exact_p) csv << *row.exact_p;
    csv << ',' << row.n << '\n';
  }
  if (!out_path.empty()) write_file(out_path, csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_ablation(const std::string& corpus_path, const std::string& out_dir,
                 const ExperimentConfig& cfg, const EndpointFlags& f,
                 const std::vector<std::size_t>& ks, std::size_t repeats, std::size_t limit) {
  std::vector<PairRecord> examples = sample_slice(load_records(corpus_path), limit, cfg.seed);

  ExperimentComponents comps;
  Wiring wiring;
  wire_chat(f, wiring, comps);
  bool any_contexts = std::any_of(ks.begin(), ks.end(), [](std::size_t k) { return k > 0; });
  if (any_contexts) {
    wire_retrieval(f, wiring, comps);  // sweep visits both augmented setups
    wire_prorec(f, wiring, comps);
  }

  std::vector<AblationRow> rows = ablation_topk(cfg, examples, ks, repeats, comps);

  std::ostringstream csv;
  csv << "setup,variant,k,mean_f1,variance,repeats\n";
  for (const auto& row : rows)
    csv << row.setup << ',' << row.variant << ',' << row.k << ',' << row.mean_f1 << ','
        << row.variance << ',' << row.repeats << '\n';
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "ablation.csv", csv.str());
  write_file(fs::path(out_dir) / "ablation.txt", render_ablation(rows));

  std::cout << render_ablation(rows);
  std::cout << "wrote " << out_dir << "/{ablation.csv,ablation.txt}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary-to-source probing and recovery pipeline"};
  app.require_subcommand(1);

  // --- ingest ---
  std::string in_path, out_dir;
  IngestConfig ingest_cfg;
  auto* ingest_cmd = app.add_subcommand("ingest", "deduplicate and split a raw pair corpus");
  ingest_cmd->add_option("--input", in_path, "raw JSONL pair file")->required();
  ingest_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  ingest_cmd->add_option("--seed", ingest_cfg.seed, "split seed");
  ingest_cmd->add_option("--test-fraction", ingest_cfg.test_fraction, "test split fraction");
  ingest_cmd->add_option("--valid-fraction", ingest_cfg.valid_fraction,
                         "validation fraction of the non-test remainder");
  ingest_cmd->add_flag_callback("--no-verify-names",
                                [&ingest_cfg] { ingest_cfg.verify_names = false; },
                                "skip checking `name` against the src signature");

  // --- train-dual-encoder ---
  std::string train_corpus, train_out;
  TrainConfig train_cfg;
  long long train_dim = train_cfg.embedding_dim;
  auto* train_cmd =
      app.add_subcommand("train-dual-encoder", "contrastively align binary and source encoders");
  train_cmd->add_option("--corpus", train_corpus, "training JSONL")->required();
  train_cmd->add_option("--out-dir", train_out, "output directory")->required();
  train_cmd->add_option("--dim", train_dim, "embedding dimension");
  train_cmd->add_option("--lr", train_cfg.learning_rate, "learning rate");
  train_cmd->add_option("--batch", train_cfg.batch_size, "batch size");
  train_cmd->add_option("--steps", train_cfg.total_steps, "optimizer steps");
  train_cmd->add_option("--warmup", train_cfg.warmup_steps, "linear warmup steps");
  train_cmd->add_option("--queue", train_cfg.queue_capacity, "momentum queue capacity");
  train_cmd->add_option("--momentum", train_cfg.momentum, "key-encoder EMA coefficient");
  train_cmd->add_option("--temperature", train_cfg.temperature, "softmax temperature");
  train_cmd->add_option("--max-vocab", train_cfg.max_vocab, "vocabulary cap (0 = none)");
  train_cmd->add_option("--seed", train_cfg.seed, "training seed");

  // --- build-index ---
  std::string index_corpus, index_encoder, index_out;
  auto* index_cmd = app.add_subcommand("build-index", "embed source functions into a dense index");
  index_cmd->add_option("--corpus", index_corpus, "JSONL of records to index")->required();
  index_cmd->add_option("--encoder", index_encoder, "source-side encoder checkpoint")->required();
  index_cmd->add_option("--out", index_out, "index output file")->required();

  // --- probe ---
  std::string probe_asm;
  EndpointFlags probe_flags;
  ProbeConfig probe_cfg;
  bool probe_json = false;
  auto* probe_cmd = app.add_subcommand("probe", "synthesize ranked source fragments for a binary");
  probe_cmd->add_option("--asm", probe_asm, "disassembly listing file")->required();
  probe_cmd->add_option("--k", probe_cfg.k, "contexts to keep");
  probe_cmd->add_option("--samples", probe_cfg.signature_samples, "signature samples to draw");
  probe_cmd->add_option("--top-p-signature", probe_cfg.top_p_signature, "signature-stage top-p");
  probe_cmd->add_option("--top-p-body", probe_cfg.top_p_body, "completion-stage top-p");
  probe_cmd->add_option("--seed", probe_cfg.base_seed, "base sampling seed");
  probe_cmd->add_option("--parallelism", probe_cfg.parallelism, "request parallelism");
  probe_cmd->add_flag("--json", probe_json, "emit JSON instead of text");
  add_endpoint_flags(probe_cmd, probe_flags);

  // --- recover ---
  std::string rec_dec, rec_task = "name";
  std::vector<std::string> rec_contexts;
  EndpointFlags rec_flags;
  RecovererConfig rec_cfg;
  bool rec_no_analysis = false, rec_json = false;
  auto* rec_cmd = app.add_subcommand("recover", "ask the recoverer about one decompiled function");
  rec_cmd->add_option("--dec", rec_dec, "decompiled code file")->required();
  rec_cmd->add_option("--task", rec_task, "name|summarize-dec|summarize-src");
  rec_cmd->add_option("--context", rec_contexts, "context file (repeatable)");
  rec_cmd->add_option("--model", rec_cfg.model, "recoverer model id");
  rec_cmd->add_option("--temperature", rec_cfg.temperature, "sampling temperature");
  rec_cmd->add_option("--max-tokens", rec_cfg.max_tokens, "response token budget");
  rec_cmd->add_flag("--summary-only", rec_cfg.summary_only,
                    "score only the Summary section of summaries");
  rec_cmd->add_flag("--no-analysis", rec_no_analysis, "omit the analysis instruction");
  rec_cmd->add_flag("--json", rec_json, "emit JSON instead of the bare answer");
  add_endpoint_flags(rec_cmd, rec_flags);

  // --- evaluate ---
  std::string eval_corpus, eval_out, eval_config;
  std::string eval_task = "name", eval_setup = "dec_only", eval_model;
  std::size_t eval_k = 5, eval_par = 1, eval_limit = 1000;
  std::uint64_t eval_seed = 0;
  double eval_rps = 0.0;
  bool eval_no_analysis = false;
  EndpointFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("evaluate", "run one setup over a test corpus");
  eval_cmd->add_option("--corpus", eval_corpus, "test JSONL")->required();
  eval_cmd->add_option("--out-dir", eval_out, "report directory")->required();
  eval_cmd->add_option("--config", eval_config, "JSON config file (flags override it)");
  auto* eval_task_opt =
      eval_cmd->add_option("--task", eval_task, "name|summarize-dec|summarize-src");
  auto* eval_setup_opt = eval_cmd->add_option("--setup", eval_setup, "dec_only|retrieval|prorec");
  auto* eval_k_opt = eval_cmd->add_option("--k", eval_k, "contexts per example");
  auto* eval_na_opt =
      eval_cmd->add_flag("--no-analysis", eval_no_analysis, "omit the analysis instruction");
  auto* eval_model_opt = eval_cmd->add_option("--model", eval_model, "recoverer model id");
  auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "experiment seed");
  auto* eval_par_opt = eval_cmd->add_option("--parallelism", eval_par, "worker pool size");
  auto* eval_rps_opt =
      eval_cmd->add_option("--rps", eval_rps, "request pacing (0 = unpaced)");
  eval_cmd->add_option("--limit", eval_limit, "examples to sample by seeded hash (0 = all)");
  add_endpoint_flags(eval_cmd, eval_flags);

  // --- meta-eval ---
  std::string meta_report, meta_human, meta_out;
  auto* meta_cmd =
      app.add_subcommand("meta-eval", "correlate metric scores with human judgements");
  meta_cmd->add_option("--report", meta_report, "report.json from evaluate")->required();
  meta_cmd->add_option("--human", meta_human, "human scores CSV (id,question,score)")->required();
  meta_cmd->add_option("--out", meta_out, "also write the correlation table here");

  // --- ablation ---
  std::string abl_corpus, abl_out, abl_config, abl_model;
  std::vector<std::size_t> abl_ks{1, 3, 5};
  std::size_t abl_repeats = 3, abl_limit = 100;
  std::uint64_t abl_seed = 0;
  EndpointFlags abl_flags;
  auto* abl_cmd =
      app.add_subcommand("ablation", "sweep context depth with and without analysis");
  abl_cmd->add_option("--corpus", abl_corpus, "test JSONL")->required();
  abl_cmd->add_option("--out-dir", abl_out, "report directory")->required();
  abl_cmd->add_option("--config", abl_config, "JSON config file (flags override it)");
  abl_cmd->add_option("--ks", abl_ks, "context depths to sweep");
  abl_cmd->add_option("--repeats", abl_repeats, "repeats per cell");
  auto* abl_model_opt = abl_cmd->add_option("--model", abl_model, "recoverer model id");
  auto* abl_seed_opt = abl_cmd->add_option("--seed", abl_seed, "experiment seed");
  abl_cmd->add_option("--limit", abl_limit, "examples to sample by seeded hash (0 = all)");
  add_endpoint_flags(abl_cmd, abl_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_cmd->parsed()) return cmd_ingest(in_path, out_dir, ingest_cfg);
    if (train_cmd->parsed()) {
      train_cfg.embedding_dim = static_cast<Eigen::Index>(train_dim);
      return cmd_train(train_corpus, train_out, train_cfg);
    }
    if (index_cmd->parsed()) return cmd_build_index(index_corpus, index_encoder, index_out);
    if (probe_cmd->parsed()) return cmd_probe(probe_asm, probe_flags, probe_cfg, probe_json);
    if (rec_cmd->parsed())
      return cmd_recover(rec_dec, rec_task, rec_contexts, rec_flags, rec_cfg, rec_no_analysis,
                         rec_json);
    if (eval_cmd->parsed()) {
      ExperimentConfig cfg;
      if (!eval_config.empty()) apply_config_file(eval_config, cfg);
      if (eval_task_opt->count()) cfg.task = parse_task(eval_task);
      if (eval_setup_opt->count()) cfg.setup = parse_setup(eval_setup);
      if (eval_k_opt->count()) cfg.k = eval_k;
      if (eval_na_opt->count()) cfg.no_analysis = true;
      if (eval_model_opt->count()) cfg.recoverer.model = eval_model;
      if (eval_seed_opt->count()) cfg.seed = eval_seed;
      if (eval_par_opt->count()) cfg.parallelism = eval_par;
      if (eval_rps_opt->count()) cfg.requests_per_second = eval_rps;
      if (cfg.setup == Setup::DecOnly) cfg.k = 0;
      return cmd_evaluate(eval_corpus, eval_out, cfg, eval_flags, eval_limit);
    }
    if (meta_cmd->parsed()) return cmd_meta_eval(meta_report, meta_human, meta_out);
    if (abl_cmd->parsed()) {
      ExperimentConfig cfg;
      if (!abl_config.empty()) apply_config_file(abl_config, cfg);
      if (abl_model_opt->count()) cfg.recoverer.model = abl_model;
      if (abl_seed_opt->count()) cfg.seed = abl_seed;
      return cmd_ablation(abl_corpus, abl_out, cfg, abl_flags, abl_ks, abl_repeats, abl_limit);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

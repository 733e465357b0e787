// Release gate. Each criterion below prints exactly one PASS/FAIL line with
// its tolerance and runtime budget pinned in code; the binary exits non-zero
// if any line fails. Everything runs offline against scripted endpoints.

#include <binprobe/contrastive.hpp>
#include <binprobe/corpus.hpp>
#include <binprobe/depgraph.hpp>
#include <binprobe/dual_trainer.hpp>
#include <binprobe/experiment.hpp>
#include <binprobe/metrics.hpp>
#include <binprobe/mlp.hpp>
#include <binprobe/nucleus.hpp>
#include <binprobe/prompts.hpp>
#include <binprobe/response_cache.hpp>
#include <binprobe/spearman.hpp>
#include <binprobe/synthetic.hpp>
#include <binprobe/vector_index.hpp>

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

using namespace binprobe;

namespace {

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

/// Collects the first failure; later expectations are skipped once tripped.
struct Gate {
  bool ok = true;
  std::string why;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      why = what;
    }
  }
};

struct Outcome {
  bool pass = false;
  std::string note;
};

struct TempTree {
  std::filesystem::path path;
  explicit TempTree(const char* stem)
      : path(std::filesystem::temp_directory_path() /
             (std::string(stem) + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempTree() { std::filesystem::remove_all(path); }
};

// --- 1. metric implementations vs brute-force oracles ---

Outcome metric_oracle_gate() {
  Gate g;
  gen::Rng rng(20240817);
  for (int i = 0; i < 1000 && g.ok; ++i) {
    std::string a = gen::rand_string(rng, 24);
    std::string b = gen::rand_string(rng, 24);
    g.expect(std::abs(chrf(a, b) - oracle::chrf(a, b)) <= 1e-9,
             fmt("chrf drifted past 1e-9 on pair %d", i));
    g.expect(std::abs(char_bleu(a, b) - oracle::char_bleu(a, b)) <= 1e-9,
             fmt("char_bleu drifted past 1e-9 on pair %d", i));
    g.expect(std::abs(char_meteor(a, b) - oracle::char_meteor(a, b)) <= 1e-9,
             fmt("char_meteor drifted past 1e-9 on pair %d", i));
    g.expect(char_rouge_l(a, b) == oracle::char_rouge_l(a, b),
             fmt("char_rouge_l not exact on pair %d", i));

    std::string pn = gen::rand_name(rng);
    std::string gn = gen::rand_name(rng);
    Prf mine = symlm_prf(pn, gn);
    Prf want = oracle::symlm_prf(pn, gn);
    g.expect(mine.precision == want.precision && mine.recall == want.recall &&
                 mine.f1 == want.f1,
             fmt("symlm_prf not exact on '%s' vs '%s'", pn.c_str(), gn.c_str()));
  }
  return {g.ok, g.ok ? "1000 pairs agreed" : g.why};
}

// --- 2. analytic gradients vs central finite differences ---

// pass iff |a-n| <= 1e-6 + 1e-4 * max(|a|,|n|): 1e-4 relative wherever the
// gradient has size, with a small absolute floor where it vanishes
bool grad_close(double analytic, double numeric) {
  return std::abs(analytic - numeric) <= 1e-6 + 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
}

template <typename Loss>
double fd_mat(Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c, Loss loss) {
  const double eps = 1e-5;
  double saved = m(r, c);
  m(r, c) = saved + eps;
  double up = loss();
  m(r, c) = saved - eps;
  double down = loss();
  m(r, c) = saved;
  return (up - down) / (2.0 * eps);
}

template <typename Loss>
double fd_vec(Eigen::VectorXd& v, Eigen::Index i, Loss loss) {
  const double eps = 1e-5;
  double saved = v(i);
  v(i) = saved + eps;
  double up = loss();
  v(i) = saved - eps;
  double down = loss();
  v(i) = saved;
  return (up - down) / (2.0 * eps);
}

Outcome gradient_gate() {
  Gate g;
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto mat = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal(rng);
    return m;
  };
  auto vec = [&](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  };

  for (int inst = 0; inst < 50 && g.ok; ++inst) {
    Eigen::Index n = 2 + Eigen::Index(rng() % 7);   // batch 2..8
    Eigen::Index d = 2 + Eigen::Index(rng() % 15);  // dim 2..16
    Eigen::Index q = Eigen::Index(rng() % 9);       // queue 0..8
    double temp = 0.1 + double(rng() % 1000) / 999.0;
    Eigen::MatrixXd a = mat(n, d), s = mat(n, d), sq = mat(q, d), aq = mat(q, d);
    auto loss = [&] { return contrastive_loss(a, s, sq, aq, temp).loss; };
    ContrastiveResult res = contrastive_loss(a, s, sq, aq, temp);
    for (Eigen::Index r = 0; r < n && g.ok; ++r)
      for (Eigen::Index c = 0; c < d && g.ok; ++c) {
        g.expect(grad_close(res.grad_asm(r, c), fd_mat(a, r, c, loss)),
                 fmt("contrastive grad_asm(%ld,%ld) off, instance %d", long(r), long(c), inst));
        g.expect(grad_close(res.grad_src(r, c), fd_mat(s, r, c, loss)),
                 fmt("contrastive grad_src(%ld,%ld) off, instance %d", long(r), long(c), inst));
      }
  }

  const Activation acts[] = {Activation::Identity, Activation::Tanh, Activation::Gelu};
  for (int inst = 0; inst < 50 && g.ok; ++inst) {
    Eigen::Index in = 1 + Eigen::Index(rng() % 16);
    Eigen::Index hid = 1 + Eigen::Index(rng() % 16);
    Eigen::Index out = 1 + Eigen::Index(rng() % 16);
    Eigen::Index rows = 1 + Eigen::Index(rng() % 8);
    ProjectionMlp mlp(mat(hid, in), vec(hid), mat(out, hid), vec(out), acts[inst % 3]);
    Eigen::MatrixXd z = mat(rows, in);
    Eigen::MatrixXd up = mat(rows, out);
    auto loss = [&] { return (up.cwiseProduct(mlp.forward(z))).sum(); };
    auto grads = mlp.backward(z, up);

    for (Eigen::Index r = 0; r < rows && g.ok; ++r)
      for (Eigen::Index c = 0; c < in && g.ok; ++c)
        g.expect(grad_close(grads.input(r, c), fd_mat(z, r, c, loss)),
                 fmt("mlp input grad off, instance %d", inst));
    for (Eigen::Index r = 0; r < hid && g.ok; ++r)
      for (Eigen::Index c = 0; c < in && g.ok; ++c)
        g.expect(grad_close(grads.w1(r, c), fd_mat(mlp.w1(), r, c, loss)),
                 fmt("mlp w1 grad off, instance %d", inst));
    for (Eigen::Index i = 0; i < hid && g.ok; ++i)
      g.expect(grad_close(grads.b1(i), fd_vec(mlp.b1(), i, loss)),
               fmt("mlp b1 grad off, instance %d", inst));
    for (Eigen::Index r = 0; r < out && g.ok; ++r)
      for (Eigen::Index c = 0; c < hid && g.ok; ++c)
        g.expect(grad_close(grads.w2(r, c), fd_mat(mlp.w2(), r, c, loss)),
                 fmt("mlp w2 grad off, instance %d", inst));
    for (Eigen::Index i = 0; i < out && g.ok; ++i)
      g.expect(grad_close(grads.b2(i), fd_vec(mlp.b2(), i, loss)),
               fmt("mlp b2 grad off, instance %d", inst));
  }
  return {g.ok, g.ok ? "50 contrastive + 50 mlp instances" : g.why};
}

// --- 3. dual-encoder convergence and held-out retrieval ---

Outcome dual_encoder_gate() {
  Gate g;
  SyntheticSpec spec;
  spec.clusters = 8;
  spec.tokens_per_cluster = 96;
  spec.items = 2200;
  spec.tokens_per_item = 12;
  spec.seed = 13;
  SyntheticCorpus corpus = make_clustered_corpus(spec);
  std::vector<AlignedPair> train(corpus.pairs.begin(), corpus.pairs.begin() + 1200);

  const double loss_bound = 0.1 * std::log(16.0);  // batch size 16
  double worst_loss = 0.0, worst_recall = 1.0;
  for (std::uint64_t seed = 1; seed <= 3 && g.ok; ++seed) {
    TrainConfig cfg;
    cfg.embedding_dim = 256;
    cfg.learning_rate = 1.0;
    cfg.batch_size = 16;
    cfg.total_steps = 2000;
    cfg.warmup_steps = 100;
    cfg.queue_capacity = 256;
    cfg.momentum = 0.99;
    cfg.temperature = 0.07;
    cfg.seed = seed;
    TrainResult result = train_dual_encoder(train, cfg);

    double final_loss = result.loss_trace.back();
    worst_loss = std::max(worst_loss, final_loss);
    g.expect(final_loss < loss_bound,
             fmt("seed %llu final loss %.4f, bound %.4f", (unsigned long long)seed, final_loss,
                 loss_bound));

    std::vector<IndexEntry> entries;
    std::vector<RecallQuery> queries;
    for (std::size_t i = 1200; i < 2200; ++i) {
      entries.push_back(
          {corpus.ids[i], result.src_encoder.encode(corpus.pairs[i].src_text).values, ""});
      queries.push_back(
          {result.asm_encoder.encode(corpus.pairs[i].asm_text).values, corpus.ids[i]});
    }
    VectorIndex index = VectorIndex::build(std::move(entries));
    double recall = index.recall_at_k(queries, 1);
    worst_recall = std::min(worst_recall, recall);
    g.expect(recall >= 0.95, fmt("seed %llu recall@1 %.3f over 1000 held-out pairs",
                                 (unsigned long long)seed, recall));
  }
  return {g.ok, g.ok ? fmt("3 seeds: worst loss %.4f < %.4f, worst recall@1 %.3f", worst_loss,
                           loss_bound, worst_recall)
                     : g.why};
}

// --- 4. nucleus truncation and sampling frequencies ---

Outcome nucleus_gate() {
  Gate g;
  const std::vector<double> dist = {0.5, 0.3, 0.15, 0.05};
  NucleusSupport support = nucleus_truncate(dist, 0.75);
  g.expect(support.indices == std::vector<std::size_t>{0, 1}, "nucleus kept the wrong support");
  g.expect(support.probs.size() == 2 && std::abs(support.probs[0] - 0.625) <= 1e-12 &&
               std::abs(support.probs[1] - 0.375) <= 1e-12,
           "renormalized probabilities are off");

  std::mt19937_64 rng(4242);
  std::size_t counts[4] = {0, 0, 0, 0};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[nucleus_sample(dist, 0.75, rng)];
  double f0 = double(counts[0]) / draws;
  double f1 = double(counts[1]) / draws;
  g.expect(counts[2] == 0 && counts[3] == 0,
           fmt("%zu draws escaped the nucleus", counts[2] + counts[3]));
  g.expect(std::abs(f0 - 0.625) <= 0.01 && std::abs(f1 - 0.375) <= 0.01,
           fmt("frequencies (%.4f, %.4f) missed (0.625, 0.375) by more than 0.01", f0, f1));
  return {g.ok, g.ok ? fmt("100k draws: %.4f / %.4f, zero leakage", f0, f1) : g.why};
}

// --- 5. dependency graphs vs the quadratic def-use oracle ---

Outcome depgraph_gate() {
  Gate g;
  gen::Rng rng(7700);
  for (int iter = 0; iter < 500 && g.ok; ++iter) {
    AsmFunction fn = parse_disassembly(gen::rand_listing(rng, 50));
    DependencyGraph got = build_dependency_graph(fn);
    std::vector<DepEdge> want = oracle::dep_edges(fn);
    g.expect(got.edges == want, fmt("edge set mismatch on listing %d (%zu instructions)", iter,
                                    fn.instructions.size()));
    g.expect(got.node_count == fn.instructions.size(), fmt("node count wrong on listing %d", iter));
  }
  return {g.ok, g.ok ? "500 listings, zero mismatches" : g.why};
}

// --- 6. end-to-end direction: probing beats its baselines ---

// Fifty functions whose gold name has four tokens. The decompiled body alone
// supports a one-token guess; a retrieved fragment names three tokens; a
// probed fragment names all four. The scripted recoverer plays that part, and
// drifts through worse answers on augmented prompts lacking the analysis
// instruction, so the variance comparison has something to detect.
std::vector<PairRecord> hinted_records(int n) {
  std::vector<PairRecord> records;
  for (int i = 0; i < n; ++i) {
    std::string num = std::to_string(i);
    PairRecord rec;
    rec.id = fmt("fx_%02d", i);
    rec.project = "constructed";
    rec.name = "load_cfg_value_" + num;
    rec.src = "int load_cfg_value_" + num + "(void) { return " + num + "; }";
    rec.dec = "int sub_" + num + "(void) { return " + num + "; }";
    rec.asm_text = "mov eax, " + num + "\nmov ebx, t" + num + "\nret";
    records.push_back(std::move(rec));
  }
  return records;
}

LinearEncoder hint_query_encoder(int n) {
  Vocabulary vocab;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n + 1);
  for (int i = 0; i < n; ++i) {
    vocab.add("t" + std::to_string(i));
    w(i, i) = 1.0;
  }
  return LinearEncoder(vocab, w, SpaceTag::Binary);
}

VectorIndex hint_index(int n) {
  std::vector<IndexEntry> entries;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(i) = 1.0;
    entries.push_back({fmt("ctx_%02d", i), e, "int hint_part_" + std::to_string(i) + "(void) { }"});
  }
  return VectorIndex::build(std::move(entries));
}

ProbeFilter trivial_filter() {
  Vocabulary bin;
  bin.add("mov");
  Eigen::MatrixXd bw = Eigen::MatrixXd::Zero(1, 2);
  bw(0, 0) = 1.0;
  Vocabulary text;
  text.add("int");
  Eigen::MatrixXd tw = Eigen::MatrixXd::Zero(1, 2);
  tw(0, 0) = 1.0;
  return {LinearEncoder(bin, bw, SpaceTag::Binary), LinearEncoder(text, tw, SpaceTag::Signature)};
}

Outcome end_to_end_gate() {
  Gate g;
  std::vector<PairRecord> records = hinted_records(50);

  std::atomic<int> drift{0};
  ScriptedChatEndpoint recoverer([&records, &drift](const ChatRequest& req) {
    std::string gold = "unknown";
    for (const auto& rec : records)
      if (req.user.find(rec.dec) != std::string::npos) {
        gold = rec.name;
        break;
      }
    bool analysis = req.user.find("Analyze whether") != std::string::npos;
    bool full = req.user.find("hint_full_") != std::string::npos;
    bool part = req.user.find("hint_part_") != std::string::npos;
    std::string answer = full ? gold : part ? "load_cfg_value" : "load_data";
    if ((full || part) && !analysis) {
      switch (drift.fetch_add(1) % 3) {
        case 1: answer = "load_cfg"; break;
        case 2: answer = "qq"; break;
        default: break;
      }
    }
    return ChatResponse{"Function Name: " + answer, std::nullopt};
  });

  ScriptedGenerationEndpoint prober([](const GenerationRequest& req) {
    auto pos = req.conditioning.raw_asm.find(", t");
    int idx = pos == std::string::npos ? 0 : std::atoi(req.conditioning.raw_asm.c_str() + pos + 3);
    if (req.mode == GenerationMode::Signature)
      return GenerationResponse{"int hint_full_" + std::to_string(idx) + "(void)", "stop"};
    return GenerationResponse{"{ }", "stop"};
  });

  LinearEncoder enc = hint_query_encoder(50);
  VectorIndex index = hint_index(50);
  ProbeFilter filter = trivial_filter();

  ExperimentConfig cfg;
  cfg.task = Task::NameRecovery;
  cfg.k = 1;
  cfg.recoverer.retry.attempts = 1;
  cfg.recoverer.retry.initial_backoff_ms = 0;
  cfg.probe.retry.attempts = 1;
  cfg.probe.retry.initial_backoff_ms = 0;
  cfg.probe.signature_samples = 3;
  cfg.probe.parallelism = 1;

  ExperimentComponents comps;
  comps.recoverer = &recoverer;
  comps.index = &index;
  comps.query_encoder = &enc;
  comps.prober = &prober;
  comps.filter = &filter;

  auto f1_of = [&](Setup setup) {
    ExperimentConfig c = cfg;
    c.setup = setup;
    ExperimentRun run = run_experiment(c, records, comps);
    if (run.report.excluded != 0) return -1.0;  // failure rows would mask the comparison
    return run.report.aggregate.at("symlm_f1");
  };
  double f1_dec = f1_of(Setup::DecOnly);
  double f1_ret = f1_of(Setup::Retrieval);
  double f1_pro = f1_of(Setup::Prorec);
  g.expect(f1_dec >= 0.0 && f1_ret >= 0.0 && f1_pro >= 0.0, "a setup recorded failure rows");
  g.expect(f1_pro > f1_dec, fmt("prorec F1 %.3f not above dec-only %.3f", f1_pro, f1_dec));
  g.expect(f1_pro >= f1_ret, fmt("prorec F1 %.3f below retrieval %.3f", f1_pro, f1_ret));

  auto rows = ablation_topk(cfg, records, {1}, 3, comps);
  double steady_max = 0.0, noisy_min = 1e18;
  for (const AblationRow& row : rows) {
    if (row.variant == "analysis") {
      steady_max = std::max(steady_max, row.variance);
      g.expect(row.variance == 0.0,
               fmt("%s analysis cell has variance %.2e", row.setup.c_str(), row.variance));
    } else if (row.variant == "no_analysis") {
      noisy_min = std::min(noisy_min, row.variance);
      g.expect(row.variance > 0.0, fmt("%s no-analysis cell shows no variance", row.setup.c_str()));
    }
  }
  g.expect(steady_max <= noisy_min, "analysis variance exceeded no-analysis variance");

  return {g.ok, g.ok ? fmt("F1 dec %.3f / retrieval %.3f / prorec %.3f; var %.1e <= %.1e", f1_dec,
                           f1_ret, f1_pro, steady_max, noisy_min)
                     : g.why};
}

// --- 7. prompt templates vs golden bytes ---

Outcome template_gate() {
  Gate g;
  auto golden = [](const char* name) {
    std::ifstream in(std::string(BINPROBE_GOLDEN_DIR) + "/" + name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();  // a missing file reads empty and fails the comparison
  };
  const std::pair<std::string_view, const char*> table[] = {
      {kSystemSrcDeveloper, "system_src_developer.txt"},
      {kSystemReverseEngineer, "system_reverse_engineer.txt"},
      {kUserSrcSummarize, "user_src_summarize.txt"},
      {kUserDecSummarizeDefault, "user_dec_summarize_default.txt"},
      {kUserDecSummarizeAugmented, "user_dec_summarize_augmented.txt"},
      {kUserNameRecoveryDefault, "user_name_recovery_default.txt"},
      {kUserNameRecoveryAugmented, "user_name_recovery_augmented.txt"},
      {kJudgeContextRelevance, "judge_context_relevance.txt"},
      {kJudgeFunctionality, "judge_functionality.txt"},
  };
  for (const auto& [tpl, file] : table)
    g.expect(std::string(tpl) == golden(file), fmt("%s differs from its template constant", file));
  return {g.ok, g.ok ? "9 templates byte-identical" : g.why};
}

// --- 8. rank correlation fixtures and exhaustive permutation p ---

// test-local exact p: positional ranks (distinct inputs only), textbook
// pearson, full enumeration of rank permutations
double enumerated_exact_p(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      r[i] = 1.0 + double(std::count_if(v.begin(), v.end(), [&](double o) { return o < v[i]; }));
    return r;
  };
  auto corr = [](const std::vector<double>& a, const std::vector<double>& b) {
    double n = double(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += (a[i] - ma) * (b[i] - mb);
      aa += (a[i] - ma) * (a[i] - ma);
      bb += (b[i] - mb) * (b[i] - mb);
    }
    return ab / std::sqrt(aa * bb);
  };
  std::vector<double> rx = ranks(x), ry = ranks(y);
  double observed = std::abs(corr(rx, ry));
  std::vector<double> perm = ry;
  std::sort(perm.begin(), perm.end());
  std::size_t total = 0, hits = 0;
  do {
    ++total;
    if (std::abs(corr(rx, perm)) >= observed - 1e-12) ++hits;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return double(hits) / double(total);
}

Outcome spearman_gate() {
  Gate g;
  struct Fx {
    std::vector<double> x, y;
    double rho;
    double p;
    bool check_p;
    double exact;
  };
  const double s32 = std::sqrt(3.0) / 2.0;
  const Fx table[] = {
      {{1, 2, 3}, {1, 3, 2}, 0.5, 2.0 / 3.0, true, 1.0},
      {{1, 2, 3, 4, 5}, {10, 20, 30, 40, 50}, 1.0, 0.0, true, 2.0 / 120.0},
      {{1, 2, 3, 4, 5}, {9, 7, 5, 3, 1}, -1.0, 0.0, true, 2.0 / 120.0},
      {{1, 2, 2, 4}, {10, 20, 20, 40}, 1.0, 0.0, true, 1.0 / 6.0},
      {{1, 2, 3, 4}, {2, 1, 4, 3}, 0.6, 0.4, true, 10.0 / 24.0},
      {{1, 2, 3, 4}, {1, 4, 2, 3}, 0.4, 0.6, true, 18.0 / 24.0},
      {{1, 2, 3, 4, 5}, {1, 2, 3, 5, 4}, 0.9, -1.0, false, 10.0 / 120.0},
      {{1, 1, 2}, {1, 2, 3}, s32, -1.0, false, 4.0 / 6.0},
      {{5, 6, 7}, {1, 2, 3}, 1.0, 0.0, true, 2.0 / 6.0},
  };
  int fx = 0;
  for (const Fx& f : table) {
    ++fx;
    SpearmanResult r = spearman(f.x, f.y);
    g.expect(std::abs(r.rho - f.rho) <= 1e-12, fmt("fixture %d rho %.12f != %.12f", fx, r.rho, f.rho));
    if (f.check_p)
      g.expect(std::abs(r.p_value - f.p) <= 1e-9, fmt("fixture %d p %.12f != %.12f", fx, r.p_value, f.p));
    g.expect(r.exact_p.has_value() && std::abs(*r.exact_p - f.exact) <= 1e-12,
             fmt("fixture %d exact p off", fx));
  }
  std::vector<double> lx(12), ly(12);
  std::iota(lx.begin(), lx.end(), 0.0);
  for (std::size_t i = 0; i < ly.size(); ++i) ly[i] = double((i * 7) % 12);
  SpearmanResult large = spearman(lx, ly);
  g.expect(!large.exact_p.has_value() && large.p_value >= 0.0 && large.p_value <= 1.0,
           "fixture 10: exact p should be absent above n=10");

  std::mt19937_64 rng(606);
  for (std::size_t n = 4; n <= 8 && g.ok; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> x(n), y(n);
      std::iota(x.begin(), x.end(), 1.0);
      std::iota(y.begin(), y.end(), 1.0);
      std::shuffle(x.begin(), x.end(), rng);
      std::shuffle(y.begin(), y.end(), rng);
      SpearmanResult r = spearman(x, y);
      g.expect(r.exact_p.has_value(), fmt("exact p missing at n=%zu", n));
      if (!r.exact_p) break;
      double want = enumerated_exact_p(x, y);
      g.expect(std::abs(*r.exact_p - want) <= 1e-12,
               fmt("exact p %.12f != enumerated %.12f at n=%zu", *r.exact_p, want, n));
    }
  }
  return {g.ok, g.ok ? "10 fixtures + 15 enumerations" : g.why};
}

// --- 9. determinism and resumability of the full offline pipeline ---

Outcome determinism_gate() {
  Gate g;
  TempTree root("bp_accept_pipeline");
  std::vector<PairRecord> records = hinted_records(20);
  std::string jsonl = (root.path / "pairs.jsonl").string();
  write_jsonl(records, jsonl);

  // ingest -> train dual encoder -> index train srcs -> cached retrieval run
  auto pipeline = [&](const std::filesystem::path& cache_dir, bool interrupt_first) {
    IngestConfig icfg;
    icfg.seed = 5;
    icfg.test_fraction = 0.3;
    icfg.valid_fraction = 0.0;
    IngestResult data = ingest_file(jsonl, icfg);

    std::vector<AlignedPair> pairs;
    for (const auto& rec : data.corpus.train) pairs.push_back({rec.asm_text, rec.src});
    TrainConfig tcfg;
    tcfg.embedding_dim = 16;
    tcfg.learning_rate = 0.5;
    tcfg.batch_size = 4;
    tcfg.total_steps = 150;
    tcfg.warmup_steps = 10;
    tcfg.queue_capacity = 32;
    tcfg.momentum = 0.9;
    tcfg.temperature = 0.2;
    tcfg.seed = 11;
    TrainResult trained = train_dual_encoder(pairs, tcfg);

    std::vector<IndexEntry> entries;
    for (const auto& rec : data.corpus.train)
      entries.push_back({rec.id, trained.src_encoder.encode(rec.src).values, rec.src});
    VectorIndex index = VectorIndex::build(std::move(entries));

    ResponseCache cache(cache_dir.string());
    ScriptedChatEndpoint recoverer([&records](const ChatRequest& req) {
      for (const auto& rec : records)
        if (req.user.find(rec.dec) != std::string::npos)
          return ChatResponse{"Function Name: " + rec.name, std::nullopt};
      return ChatResponse{"Function Name: unmatched", std::nullopt};
    });

    ExperimentConfig cfg;
    cfg.task = Task::NameRecovery;
    cfg.setup = Setup::Retrieval;
    cfg.k = 2;
    cfg.seed = 21;
    cfg.recoverer.retry.attempts = 1;
    cfg.recoverer.retry.initial_backoff_ms = 0;

    ExperimentComponents comps;
    comps.recoverer = &recoverer;
    comps.cache = &cache;
    comps.index = &index;
    comps.query_encoder = &trained.asm_encoder;

    const std::vector<PairRecord>& test = data.corpus.test;
    g.expect(test.size() >= 4, fmt("fixture split too small: %zu test examples", test.size()));
    if (interrupt_first) {
      std::vector<PairRecord> half(test.begin(), test.begin() + test.size() / 2);
      run_experiment(cfg, half, comps);  // simulated interruption: partial cache left behind
    }
    ExperimentRun run = run_experiment(cfg, test, comps);
    return report_to_json(run.report).dump() + "\n" + report_to_csv(run.report);
  };

  std::string first = pipeline(root.path / "cache_a", false);
  std::string warm = pipeline(root.path / "cache_a", false);
  std::string resumed = pipeline(root.path / "cache_b", true);
  g.expect(first == warm, "warm-cache rerun produced different bytes");
  g.expect(first == resumed, "interrupted-then-resumed run produced different bytes");
  return {g.ok, g.ok ? fmt("3 passes, %zu report bytes each identical", first.size()) : g.why};
}

struct Criterion {
  const char* label;
  long budget_ms;  // 0 = no budget pinned
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"metric oracles: 1000 pairs, n-gram |d|<=1e-9, set/LCS exact", 30000, metric_oracle_gate},
      {"gradients: rel err <= 1e-4 vs central differences", 10000, gradient_gate},
      {"dual encoder: loss < 0.1*ln(16), recall@1 >= 0.95, 3 seeds", 60000, dual_encoder_gate},
      {"nucleus sampler: 100k draws within 0.01, zero leakage", 5000, nucleus_gate},
      {"dependency graphs match the quadratic def-use oracle", 10000, depgraph_gate},
      {"end-to-end: prorec > dec-only, >= retrieval; analysis variance", 30000, end_to_end_gate},
      {"prompt templates byte-match the golden files", 0, template_gate},
      {"spearman fixtures exact; permutation p vs enumeration", 0, spearman_gate},
      {"pipeline reruns and resumed runs are byte-identical", 0, determinism_gate},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("unhandled exception: ") + e.what()};
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    bool over = criteria[i].budget_ms > 0 && ms >= criteria[i].budget_ms;
    bool pass = out.pass && !over;
    std::string timing = criteria[i].budget_ms > 0
                             ? fmt("%.1fs / %lds", double(ms) / 1000.0, criteria[i].budget_ms / 1000)
                             : fmt("%.1fs", double(ms) / 1000.0);
    std::printf("%s  %zu/9  %s  [%s]  %s\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].label,
                timing.c_str(),
                over ? fmt("over budget; %s", out.note.c_str()).c_str() : out.note.c_str());
    if (!pass) ++failures;
  }
  if (failures == 0)
    std::printf("acceptance: all 9 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}

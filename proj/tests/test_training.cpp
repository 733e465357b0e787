#include <catch2/catch_amalgamated.hpp>

#include <binprobe/dual_trainer.hpp>
#include <binprobe/synthetic.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unistd.h>

using namespace binprobe;
using Catch::Approx;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.embedding_dim = 16;
  cfg.learning_rate = 0.2;
  cfg.batch_size = 4;
  cfg.total_steps = 40;
  cfg.warmup_steps = 10;
  cfg.queue_capacity = 32;
  cfg.momentum = 0.99;
  cfg.temperature = 0.5;
  return cfg;
}

std::vector<AlignedPair> toy_pairs(std::size_t items = 64) {
  SyntheticSpec spec;
  spec.clusters = 4;
  spec.tokens_per_cluster = 8;
  spec.items = items;
  spec.tokens_per_item = 3;
  spec.seed = 7;
  return make_clustered_corpus(spec).pairs;
}

double mean_of(const std::vector<double>& xs, std::size_t from, std::size_t to) {
  return std::accumulate(xs.begin() + from, xs.begin() + to, 0.0) / double(to - from);
}

struct TempFile {
  std::string path;
  explicit TempFile(const char* stem)
      : path((std::filesystem::temp_directory_path() /
              (std::string(stem) + "_" + std::to_string(::getpid()) + ".csv"))
                 .string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("training is bit-for-bit deterministic per seed") {
  auto pairs = toy_pairs();
  auto cfg = small_config();
  cfg.seed = 42;

  auto a = train_dual_encoder(pairs, cfg);
  auto b = train_dual_encoder(pairs, cfg);
  CHECK(a.asm_encoder.weight() == b.asm_encoder.weight());
  CHECK(a.src_encoder.weight() == b.src_encoder.weight());
  REQUIRE(a.loss_trace.size() == cfg.total_steps);
  CHECK(a.loss_trace == b.loss_trace);

  cfg.seed = 43;
  auto c = train_dual_encoder(pairs, cfg);
  CHECK(a.loss_trace != c.loss_trace);
}

TEST_CASE("trained encoders carry the right spaces and shapes") {
  auto pairs = toy_pairs(16);
  auto cfg = small_config();
  cfg.total_steps = 5;
  auto res = train_dual_encoder(pairs, cfg);
  CHECK(res.asm_encoder.space() == SpaceTag::Binary);
  CHECK(res.src_encoder.space() == SpaceTag::Source);
  CHECK(res.asm_encoder.dimension() == cfg.embedding_dim);
  CHECK(res.src_encoder.dimension() == cfg.embedding_dim);
  // the two spaces tokenize independently
  CHECK(res.asm_encoder.vocab().lookup("a_0_0").has_value());
  CHECK_FALSE(res.asm_encoder.vocab().lookup("s_0_0").has_value());
  CHECK(res.src_encoder.vocab().lookup("s_0_0").has_value());
}

TEST_CASE("max_vocab caps both vocabularies") {
  auto pairs = toy_pairs(32);
  auto cfg = small_config();
  cfg.total_steps = 1;
  cfg.max_vocab = 5;
  auto res = train_dual_encoder(pairs, cfg);
  CHECK(res.asm_encoder.vocab().size() == 5);
  CHECK(res.src_encoder.vocab().size() == 5);
  CHECK(res.asm_encoder.weight().cols() == 6);  // +1 for the OOV slot
}

TEST_CASE("contrastive loss starts near ln(batch) and then drops") {
  auto pairs = toy_pairs(200);
  auto cfg = small_config();
  cfg.embedding_dim = 32;
  cfg.batch_size = 8;
  cfg.total_steps = 300;
  cfg.warmup_steps = 20;
  cfg.learning_rate = 0.5;
  cfg.temperature = 0.2;
  cfg.queue_capacity = 64;
  auto res = train_dual_encoder(pairs, cfg);

  // random init puts every batch item in a near-uniform softmax
  CHECK(std::abs(res.loss_trace.front() - std::log(8.0)) < 0.5);
  double early = mean_of(res.loss_trace, 0, 20);
  double late = mean_of(res.loss_trace, res.loss_trace.size() - 20, res.loss_trace.size());
  CAPTURE(early, late);
  CHECK(late < 0.5 * early);

  // aligned pairs end up closer than mismatched ones
  double aligned = 0.0, crossed = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    auto a = res.asm_encoder.encode(pairs[i].asm_text);
    auto s = res.src_encoder.encode(pairs[i].src_text);
    auto other = res.src_encoder.encode(pairs[(i + 1) % 20].src_text);
    aligned += cosine_similarity(a, s);
    crossed += cosine_similarity(a, other);
  }
  CAPTURE(aligned, crossed);
  CHECK(aligned > crossed + 1.0);
}

TEST_CASE("warmup scales the first update linearly") {
  auto pairs = toy_pairs(16);
  auto cfg = small_config();
  cfg.queue_capacity = 0;
  cfg.seed = 5;

  cfg.total_steps = 0;
  Eigen::MatrixXd init = train_dual_encoder(pairs, cfg).asm_encoder.weight();

  cfg.total_steps = 1;
  cfg.warmup_steps = 0;
  Eigen::MatrixXd full = train_dual_encoder(pairs, cfg).asm_encoder.weight();

  cfg.warmup_steps = 4;  // first step runs at lr/4
  Eigen::MatrixXd ramped = train_dual_encoder(pairs, cfg).asm_encoder.weight();

  Eigen::MatrixXd full_delta = full - init;
  Eigen::MatrixXd ramp_delta = ramped - init;
  REQUIRE(full_delta.cwiseAbs().maxCoeff() > 0.0);
  CHECK((ramp_delta - 0.25 * full_delta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("batch size clamps to the corpus") {
  auto pairs = toy_pairs(8);
  auto cfg = small_config();
  cfg.batch_size = 64;  // larger than the corpus
  cfg.total_steps = 3;
  auto res = train_dual_encoder(pairs, cfg);
  CHECK(res.loss_trace.size() == 3);
  CHECK(std::isfinite(res.loss_trace.back()));
}

TEST_CASE("trainer rejects unusable configurations") {
  auto pairs = toy_pairs(8);
  auto cfg = small_config();

  CHECK_THROWS_AS(train_dual_encoder({}, cfg), InsufficientData);
  CHECK_THROWS_AS(train_dual_encoder({pairs[0]}, cfg), InsufficientData);

  auto bad = cfg;
  bad.batch_size = 1;
  CHECK_THROWS_AS(train_dual_encoder(pairs, bad), ConfigError);
  bad = cfg;
  bad.embedding_dim = 0;
  CHECK_THROWS_AS(train_dual_encoder(pairs, bad), ConfigError);
  bad = cfg;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_dual_encoder(pairs, bad), ConfigError);
  bad = cfg;
  bad.momentum = 1.0;  // forwarded to the key-encoder state
  CHECK_THROWS_AS(train_dual_encoder(pairs, bad), ConfigError);
}

TEST_CASE("loss trace round-trips through csv") {
  std::vector<double> trace{2.772588722239781, 1.0, 0.3333333333333333, 1e-9, 0.0};
  TempFile tmp("bp_trace");
  save_loss_trace(trace, tmp.path);
  CHECK(load_loss_trace(tmp.path) == trace);

  save_loss_trace({}, tmp.path);
  CHECK(load_loss_trace(tmp.path).empty());
}

TEST_CASE("loss trace loader rejects malformed files") {
  TempFile tmp("bp_trace_bad");

  {
    std::ofstream out(tmp.path);
    out << "iteration,loss\n0,1.0\n";
  }
  CHECK_THROWS_AS(load_loss_trace(tmp.path), CacheCorruption);

  {
    std::ofstream out(tmp.path);
    out << "step,loss\n0,1.0\n2,0.5\n";  // skips step 1
  }
  CHECK_THROWS_AS(load_loss_trace(tmp.path), CacheCorruption);

  {
    std::ofstream out(tmp.path);
    out << "step,loss\n0;1.0\n";
  }
  CHECK_THROWS_AS(load_loss_trace(tmp.path), CacheCorruption);

  CHECK_THROWS_AS(load_loss_trace("/nonexistent/bp_trace.csv"), Error);
}
